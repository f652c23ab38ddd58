#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "cascade/errors.hpp"

namespace cascade::quad {

namespace detail {

// 15-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
inline constexpr std::array<double, 8> kNodes = {
    0.0,
    0.2011940939974345,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.9372733924007060,
    0.9879925180204854,
};
inline constexpr std::array<double, 8> kWeights = {
    0.2025782419255613,
    0.1984314853271116,
    0.1861610000155622,
    0.1662692058169939,
    0.1395706779261543,
    0.1071592204671719,
    0.0703660474881081,
    0.0307532419961173,
};

template <class F>
double gauss15(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = kWeights[0] * f(mid);
    for (std::size_t i = 1; i < kNodes.size(); ++i) {
        const double dx = half * kNodes[i];
        sum += kWeights[i] * (f(mid - dx) + f(mid + dx));
    }
    return sum * half;
}

struct Panel {
    double a;
    double b;
    double value; // two-half refinement
    double error; // |one panel - two halves|
};

struct PanelOrder {
    bool operator()(const Panel& lhs, const Panel& rhs) const {
        if (lhs.error != rhs.error) {
            return lhs.error < rhs.error;
        }
        return lhs.a > rhs.a;
    }
};

} // namespace detail

// Globally adaptive composite Gauss-Legendre integration of f over [a, b].
// Panels are refined worst-error-first until the summed error estimate drops
// below abs_tolerance. Handles integrable endpoint singularities, since the
// error mass concentrates in ever-shrinking edge panels.
template <class F>
double integrate(F&& f, double a, double b, double abs_tolerance, std::size_t max_panels = 40000) {
    if (!(b > a)) {
        throw NumericIntegrationError("integration interval is empty");
    }

    auto make_panel = [&](double lo, double hi) {
        const double mid = 0.5 * (lo + hi);
        const double coarse = detail::gauss15(f, lo, hi);
        const double fine = detail::gauss15(f, lo, mid) + detail::gauss15(f, mid, hi);
        if (!std::isfinite(fine) || !std::isfinite(coarse)) {
            throw NumericIntegrationError("non-finite integrand value");
        }
        return detail::Panel{lo, hi, fine, std::abs(fine - coarse)};
    };

    std::priority_queue<detail::Panel, std::vector<detail::Panel>, detail::PanelOrder> queue;
    double total_error = 0.0;

    const std::size_t initial = 8;
    for (std::size_t i = 0; i < initial; ++i) {
        const double lo = a + (b - a) * static_cast<double>(i) / initial;
        const double hi = a + (b - a) * static_cast<double>(i + 1) / initial;
        detail::Panel p = make_panel(lo, hi);
        total_error += p.error;
        queue.push(p);
    }

    std::vector<detail::Panel> done;
    while (total_error > abs_tolerance) {
        if (queue.empty() || queue.size() + done.size() >= max_panels) {
            throw NumericIntegrationError("quadrature failed to converge to tolerance");
        }
        detail::Panel worst = queue.top();
        queue.pop();
        total_error -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // Interval at floating point resolution; accept as is.
            done.push_back(worst);
            continue;
        }
        for (const detail::Panel& half : {make_panel(worst.a, mid), make_panel(mid, worst.b)}) {
            total_error += half.error;
            queue.push(half);
        }
    }

    while (!queue.empty()) {
        done.push_back(queue.top());
        queue.pop();
    }
    std::sort(done.begin(), done.end(),
              [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
    double sum = 0.0;
    for (const detail::Panel& p : done) {
        sum += p.value;
    }
    return sum;
}

} // namespace cascade::quad
