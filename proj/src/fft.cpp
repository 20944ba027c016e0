#include "speckle/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace speckle::fft {
namespace {

// Plans are cached per (h, w, direction). FFTW_UNALIGNED keeps the plan valid
// for any caller buffer, FFTW_ESTIMATE keeps plan selection independent of
// runtime timings (and therefore reproducible).
class PlanCache {
 public:
  fftw_plan get(int h, int w, int sign) {
    std::scoped_lock lock(mu_);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> scratch(size_t(h) * w);
    fftw_plan p = fftw_plan_dft_2d(h, w, scratch.data(), scratch.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void transform_2d(ComplexField& field, bool inverse) {
  if (field.empty()) return;
  int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
  fftw_plan p = cache().get(field.h(), field.w(), sign);
  auto* ptr = reinterpret_cast<fftw_complex*>(field.data());
  fftw_execute_dft(p, ptr, ptr);
  if (inverse) {
    double scale = 1.0 / (double(field.h()) * double(field.w()));
    for (size_t i = 0; i < field.size(); ++i) field.data()[i] *= scale;
  }
}

}  // namespace speckle::fft
