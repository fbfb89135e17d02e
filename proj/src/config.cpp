#include "pwl/config.hpp"

namespace pwl {

Tolerances& tolerances() {
    static Tolerances t;
    return t;
}

Caps& caps() {
    static Caps c;
    return c;
}

}  // namespace pwl
