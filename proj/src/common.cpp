#include "electroelastic/common.hpp"

namespace electroelastic {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Assembly: return "assembly";
    case ErrorKind::NonConvergence: return "nonconvergence";
    case ErrorKind::Inadmissible: return "inadmissible";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace electroelastic
