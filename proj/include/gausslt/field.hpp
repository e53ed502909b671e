#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gausslt/covariance.hpp"
#include "gausslt/errors.hpp"
#include "gausslt/heat_kernel.hpp"

namespace gausslt {

/// Experiment descriptor for Z(t,s) = X_t - X~_s observed at offset x.
struct FieldSpec {
    CovarianceModel model1 = CovarianceModel::fbm(0.5);
    CovarianceModel model2 = CovarianceModel::fbm(0.5);
    MultiIndex k = MultiIndex::zeros(1);
    double T = 1.0;
    std::vector<double> x = {0.0};
    double eps = 0.1;

    std::size_t d() const noexcept { return k.dim(); }

    bool x_is_zero() const noexcept {
        return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
    }

    double x_norm() const noexcept {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::sqrt(s);
    }

    void validate() const {
        if (k.dim() == 0) throw PreconditionError("d must be >= 1");
        if (x.size() != k.dim())
            throw PreconditionError("x has " + std::to_string(x.size()) + " coordinates but d = " +
                                        std::to_string(k.dim()),
                                    double(x.size()));
        if (!(T > 0.0)) throw PreconditionError("T must be > 0", T);
        if (!(eps > 0.0)) throw PreconditionError("eps must be > 0", eps);
    }
};

/// The same field with the two processes exchanged.
inline FieldSpec swapped(FieldSpec s) {
    std::swap(s.model1, s.model2);
    return s;
}

}  // namespace gausslt
