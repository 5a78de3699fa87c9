#include <cmath>
#include <cstdint>
#include <vector>

#include "dsmote/kernels.hpp"

#define DS_PAR_FOR
#define DS_PAR_FOR2

namespace dsmote::kernels::serial {

#include "kernels_impl.inl"

}  // namespace dsmote::kernels::serial
