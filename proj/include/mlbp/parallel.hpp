#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mlbp {

inline int max_threads() noexcept {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Caps the OpenMP team size for the lifetime of the object.
class ScopedThreadLimit {
public:
    explicit ScopedThreadLimit(int threads) noexcept : previous_(max_threads()) {
#ifdef _OPENMP
        omp_set_num_threads(threads > 0 ? threads : 1);
#else
        (void)threads;
#endif
    }
    ~ScopedThreadLimit() {
#ifdef _OPENMP
        omp_set_num_threads(previous_);
#endif
    }
    ScopedThreadLimit(const ScopedThreadLimit&) = delete;
    ScopedThreadLimit& operator=(const ScopedThreadLimit&) = delete;

private:
    int previous_;
};

}  // namespace mlbp
