#include "qps/fourier.hpp"

namespace qps {

fourier_config& fourier_settings() {
    static fourier_config cfg;
    return cfg;
}

scalar_map real_trig(const std::vector<cplx>& nonneg_coeffs) {
    if (nonneg_coeffs.empty()) return scalar_map::constant(0.0);
    int n = static_cast<int>(nonneg_coeffs.size()) - 1;
    scalar_map m(n, 1, true);
    m.at(0) = nonneg_coeffs[0].real();
    for (int k = 1; k <= n; ++k) {
        m.at(k) = nonneg_coeffs[k];
        m.at(-k) = std::conj(nonneg_coeffs[k]);
    }
    return m;
}

scalar_map cosine_potential() { return real_trig({0.0, 1.0}); }

} // namespace qps
