#include <cstdio>

#include "cubesect/cubesect.hpp"

using namespace cubesect;

int main() {
    const auto cube = field_params(Field::Real);
    const auto disc = field_params(Field::Complex);

    // a section of the 3-cube through the point at distance 1/2 along (3,2,1)
    const SectionQuery q(normalize_direction({3.0, 2.0, 1.0}), 1.0, cube);
    const auto rep = section_volume_report(q);
    std::printf("quadrature  %.12f  (+- %.1e, tail: %s)\n", rep.value, rep.error_estimate, to_string(rep.tail));

    McConfig mc;
    mc.samples = 2'000'000;
    const auto est = estimate_section_volume(q, mc);
    std::printf("monte carlo %.6f +- %.6f\n", est.value, est.std_error);

    for (std::size_t n : {2, 3, 10, 100})
        std::printf("diag-%-3zu real %.6f  complex %.6f\n", n,
                    section_volume(SectionQuery(diagonal_direction(n), 1.0, cube)),
                    section_volume(SectionQuery(diagonal_direction(n), 1.0, disc)));
    std::printf("limits     real %.6f  complex %.6f\n", diagonal_limit(cube), diagonal_limit(disc));

    for (const auto& f : {cube, disc}) {
        const auto c = theorem1_certificate(f);
        std::printf("%-7s p >= %.6f  threshold %.6f  A(a,1) >= %.6f\n", to_string(f.field), c.p_lower.value,
                    c.threshold, c.final_bound);
    }
}
