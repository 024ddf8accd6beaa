#include "sojourn/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace sojourn {

namespace {

std::mutex g_plan_mu;
std::map<std::pair<int, int>, fftw_plan> g_plans;

fftw_plan plan_for(int n, int direction) {
  std::lock_guard<std::mutex> lock(g_plan_mu);
  auto key = std::make_pair(n, direction);
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  ComplexBuffer scratch(static_cast<std::size_t>(n) * n * n);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_3d(n, n, n, p, p, direction < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  if (!plan) throw Error(ErrorKind::InvalidArgument, "FFTW planning failed");
  g_plans.emplace(key, plan);
  return plan;
}

}  // namespace

void fft3_inplace(int n, int direction, cplx* data) {
  fftw_plan plan = plan_for(n, direction);
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, p, p);
}

}  // namespace sojourn
