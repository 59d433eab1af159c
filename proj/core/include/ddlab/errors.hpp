#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddlab {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map them to exit codes without enumerating kinds.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DDLAB_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// gf2
DDLAB_DEFINE_ERROR(DimensionExhausted);
DDLAB_DEFINE_ERROR(BudgetExceeded);
DDLAB_DEFINE_ERROR(PointInSpan);

// pregeometry
DDLAB_DEFINE_ERROR(SearchBudgetExceeded);
DDLAB_DEFINE_ERROR(NoIndependentSet);

// dualdd
DDLAB_DEFINE_ERROR(CacheIncomplete);
DDLAB_DEFINE_ERROR(GroundExhausted);
DDLAB_DEFINE_ERROR(IntermediateAssertFailed);
DDLAB_DEFINE_ERROR(Degenerate);
DDLAB_DEFINE_ERROR(InsufficientWitnesses);

// definability
DDLAB_DEFINE_ERROR(MajorityTie);
DDLAB_DEFINE_ERROR(PartitionViolation);
DDLAB_DEFINE_ERROR(NotASupport);
DDLAB_DEFINE_ERROR(ArityMismatch);
DDLAB_DEFINE_ERROR(UnknownConstant);
DDLAB_DEFINE_ERROR(NotEquivalence);
DDLAB_DEFINE_ERROR(DichotomyViolated);

// Internal consistency checks that can only fail on a bug or on an operator
// that is not actually a pregeometry.
DDLAB_DEFINE_ERROR(InvariantViolation);

#undef DDLAB_DEFINE_ERROR

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error("SyntaxError", what + " at offset " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace ddlab
