#pragma once

#include <stdexcept>
#include <string>

namespace transferlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define TRANSFERLAB_ERROR(Name) \
    struct Name : Error { using Error::Error; }

TRANSFERLAB_ERROR(DomainEscape);
TRANSFERLAB_ERROR(WeightSumError);
TRANSFERLAB_ERROR(NoiseNormalizationError);
TRANSFERLAB_ERROR(SpecError);
TRANSFERLAB_ERROR(ZeroSlopeOverlap);
TRANSFERLAB_ERROR(RowDefectTooLarge);
TRANSFERLAB_ERROR(DimensionMismatch);
TRANSFERLAB_ERROR(EmptySupport);
TRANSFERLAB_ERROR(NoConvergence);
TRANSFERLAB_ERROR(CyclicClassMismatch);
TRANSFERLAB_ERROR(MonotonicityViolation);
TRANSFERLAB_ERROR(MultipleComponents);
TRANSFERLAB_ERROR(PeriodNotOne);
TRANSFERLAB_ERROR(SupportViolation);
TRANSFERLAB_ERROR(UnknownId);

#undef TRANSFERLAB_ERROR

}  // namespace transferlab
