#include <cmath>
#include <cstdint>
#include <vector>

#include "dsmote/kernels.hpp"

#define DS_PAR_FOR _Pragma("omp parallel for schedule(static)")
#define DS_PAR_FOR2 _Pragma("omp parallel for collapse(2) schedule(static)")

namespace dsmote::kernels {

#include "kernels_impl.inl"

}  // namespace dsmote::kernels
