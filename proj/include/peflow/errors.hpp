// Exception taxonomy shared by all modules. Every throw site uses one of
// these types so callers can catch by failure class rather than parsing
// message strings.
#pragma once

#include <stdexcept>
#include <string>

namespace peflow {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PEFLOW_DEFINE_ERROR(Name)            \
  struct Name final : Error {                \
    using Error::Error;                      \
  }

// mesh construction / shape
PEFLOW_DEFINE_ERROR(NonManifold);
PEFLOW_DEFINE_ERROR(DegenerateFace);
PEFLOW_DEFINE_ERROR(InconsistentOrientation);
PEFLOW_DEFINE_ERROR(ShapeMismatch);
PEFLOW_DEFINE_ERROR(InvalidP);

// eigensolver
PEFLOW_DEFINE_ERROR(ConstantInput);
PEFLOW_DEFINE_ERROR(NotRecentered);
PEFLOW_DEFINE_ERROR(NotConverged);
PEFLOW_DEFINE_ERROR(SolverBreakdown);
PEFLOW_DEFINE_ERROR(MeshMismatch);

// flow integration and closed-form bounds
PEFLOW_DEFINE_ERROR(BlowupDetected);
PEFLOW_DEFINE_ERROR(StepUnderflow);
PEFLOW_DEFINE_ERROR(PastBlowup);
PEFLOW_DEFINE_ERROR(DenominatorVanishes);
PEFLOW_DEFINE_ERROR(NegativeC);
PEFLOW_DEFINE_ERROR(MissingLambda);

// monotone quantity evaluation and checks
PEFLOW_DEFINE_ERROR(BranchMismatch);
PEFLOW_DEFINE_ERROR(PinchingViolated);
PEFLOW_DEFINE_ERROR(WrongSign);
PEFLOW_DEFINE_ERROR(NegativeEps);

// harness
PEFLOW_DEFINE_ERROR(BadParams);
PEFLOW_DEFINE_ERROR(ParseError);
PEFLOW_DEFINE_ERROR(ValidationError);

#undef PEFLOW_DEFINE_ERROR

}  // namespace peflow
