#include "shrink/parallel.hpp"

#include <cstdlib>
#include <string>

namespace shrink {

int default_threads() {
  const char* env = std::getenv("SHRINK_THREADS");
  if (env == nullptr) return 1;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 1;
  } catch (...) {
    return 1;
  }
}

}  // namespace shrink
