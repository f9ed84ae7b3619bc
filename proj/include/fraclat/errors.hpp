#pragma once

#include <stdexcept>
#include <string>

namespace fraclat {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FRACLAT_ERROR_TYPE(Name)                                  \
    struct Name : Error {                                         \
        explicit Name(const std::string& msg) : Error(msg) {}     \
    }

FRACLAT_ERROR_TYPE(InvalidAlpha);
FRACLAT_ERROR_TYPE(InvalidMass);
FRACLAT_ERROR_TYPE(InvalidS);
FRACLAT_ERROR_TYPE(AlphaTooLarge);
FRACLAT_ERROR_TYPE(BetaTooLarge);
FRACLAT_ERROR_TYPE(QuadratureDivergence);
FRACLAT_ERROR_TYPE(RadiusTooSmall);
FRACLAT_ERROR_TYPE(FitUnstable);
FRACLAT_ERROR_TYPE(SubcriticalS);
FRACLAT_ERROR_TYPE(GammaSupercritical);
FRACLAT_ERROR_TYPE(BudgetExceeded);
FRACLAT_ERROR_TYPE(SearchExhausted);
FRACLAT_ERROR_TYPE(EmptyGrid);
FRACLAT_ERROR_TYPE(SolveFailed);
FRACLAT_ERROR_TYPE(EigFailed);
FRACLAT_ERROR_TYPE(ConfigInvalid);

#undef FRACLAT_ERROR_TYPE

}  // namespace fraclat
