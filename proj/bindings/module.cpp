// bindings added in a later build step
#include <pybind11/pybind11.h>
PYBIND11_MODULE(_phasor, m) { m.doc() = "placeholder"; }
