#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

/// Error categories. The CLI maps them onto process exit codes.
enum class ErrorCode {
  kSpec,          // malformed or ill-founded species specification
  kPrecondition,  // operation called outside its domain
  kBudget,        // a configured budget (rejection, enumeration) ran out
  kNumeric,       // tail or convergence control failed
  kUnsupported,   // construction outside the supported subclass
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), code_(code), kind_(std::move(kind)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorCode code_;
  std::string kind_;
};

#define GIBBS_DEFINE_ERROR(Name, Code)                                      \
  struct Name : Error {                                                     \
    explicit Name(const std::string& what) : Error(Code, #Name, what) {}    \
  }

GIBBS_DEFINE_ERROR(SpecError, ErrorCode::kSpec);
GIBBS_DEFINE_ERROR(IllFoundedRecursion, ErrorCode::kSpec);
GIBBS_DEFINE_ERROR(InnerHasConstantTerm, ErrorCode::kSpec);
GIBBS_DEFINE_ERROR(PreconditionError, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(EmptySize, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(ZeroMass, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(KeyMismatch, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(InsufficientData, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(InnerNotSubexponential, ErrorCode::kPrecondition);
GIBBS_DEFINE_ERROR(SizeGuardExceeded, ErrorCode::kBudget);
GIBBS_DEFINE_ERROR(RejectionBudgetExceeded, ErrorCode::kBudget);
GIBBS_DEFINE_ERROR(TailNotControlled, ErrorCode::kNumeric);
GIBBS_DEFINE_ERROR(Unsupported, ErrorCode::kUnsupported);

#undef GIBBS_DEFINE_ERROR

}  // namespace gibbs
