#ifndef RANKFORGE_MODEL_IO_HPP
#define RANKFORGE_MODEL_IO_HPP

#include <iosfwd>
#include <string>

#include "rankforge/functionals.hpp"

namespace rankforge::model_io {

// Versioned plain-text model format. The header line is
//   rankforge-model v1 <family> <dims...>
// followed by one parameter per line in a fixed order:
//   linear <m>:                bias, w_1..w_m
//   quad <m> <P>:              bias, w_1..w_m, then P lines `a b coeff`
//   bilinear <d> <n1> <n2> <squash>: A row-major, then B row-major
//   metric <d> <n1> <n2> <tau>:      A row-major, then B row-major
// Values use shortest round-trip decimals, so write/read is bit-exact.
void write_model(const functionals::Model& m, std::ostream& out);
functionals::Model read_model(std::istream& in);

void save_model(const functionals::Model& m, const std::string& path);
functionals::Model load_model(const std::string& path);

std::string format_double(double v);

}  // namespace rankforge::model_io

#endif  // RANKFORGE_MODEL_IO_HPP
