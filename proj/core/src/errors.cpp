#include "pheno/errors.hpp"

namespace pheno {

NumericalError::NumericalError(const std::string& what, double t, double x)
    : Error(what), t_(t), x_(x) {}

}  // namespace pheno
