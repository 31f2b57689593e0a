#pragma once

#include <stdexcept>
#include <string>

namespace kdm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define KDM_ERROR(Name)                                    \
  struct Name : Error {                                    \
    explicit Name(const std::string& m) : Error(#Name ": " + m) {} \
  }

KDM_ERROR(DomainError);
KDM_ERROR(CapacityError);
KDM_ERROR(NoSolution);
KDM_ERROR(StructureError);
KDM_ERROR(NotSemisimple);
KDM_ERROR(TwistError);
KDM_ERROR(NotFactorizable);
KDM_ERROR(PathError);
KDM_ERROR(DecompositionError);
KDM_ERROR(ConfigError);
KDM_ERROR(UsageError);

#undef KDM_ERROR

}  // namespace kdm
