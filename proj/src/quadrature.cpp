#include "qocc/quadrature.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace qocc::quad {

namespace {

GaussRule build_gauss_legendre(int n)
{
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// 15-point Kronrod extension of the 7-point Gauss rule.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

Segment kronrod15(const Integrand& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = fc * kWgk[7];
    double resg = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    resk *= h;
    resg *= h;
    return {a, b, resk, std::abs(resk - resg)};
}

} // namespace

const GaussRule& gauss_legendre(int n)
{
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
    return it->second;
}

Result integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                          double rel_tol, int max_intervals)
{
    Result out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<Segment> heap;
    Segment first = kronrod15(f, a, b);
    heap.push(first);
    double total = first.value;
    double total_err = first.error;
    out.evaluations = 15;
    int intervals = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           intervals < max_intervals) {
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = kronrod15(f, worst.a, mid);
        const Segment right = kronrod15(f, mid, worst.b);
        out.evaluations += 30;
        ++intervals;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the leaves so the running update's cancellation does not leak in.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.abs_error = total_err;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

Result integrate_adaptive_inf(const Integrand& f, double a, double abs_tol,
                              double rel_tol, int max_intervals)
{
    auto g = [&f, a](double u) {
        if (u >= 1.0) return 0.0;
        const double om = 1.0 - u;
        return f(a + u / om) / (om * om);
    };
    return integrate_adaptive(g, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

Grid composite_grid(double a, double b, double panel_width, int order)
{
    Grid grid;
    if (b <= a) return grid;
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / panel_width));
    const double w = (b - a) / static_cast<double>(panels);
    const GaussRule& rule = gauss_legendre(order);
    grid.nodes.reserve(panels * order);
    grid.weights.reserve(panels * order);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + w * static_cast<double>(p);
        const double c = lo + 0.5 * w;
        for (int k = 0; k < order; ++k) {
            grid.nodes.push_back(c + 0.5 * w * rule.nodes[k]);
            grid.weights.push_back(0.5 * w * rule.weights[k]);
        }
    }
    return grid;
}

double integrate_panels(const Integrand& f, double a, double b, double panel_width,
                        int order)
{
    const Grid grid = composite_grid(a, b, panel_width, order);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) sum += grid.weights[i] * f(grid.nodes[i]);
    return sum;
}

double RichardsonTable::error_estimate() const
{
    if (rows.size() < 2) return std::abs(rows.front().front());
    return std::abs(rows.back().front() - rows[rows.size() - 2].back());
}

RichardsonTable richardson(std::span<const double> values, double ratio, double first_order,
                           double order_step)
{
    if (values.empty()) throw std::invalid_argument("richardson: no values");
    RichardsonTable table;
    table.rows.emplace_back(values.begin(), values.end());
    for (std::size_t j = 1; j < values.size(); ++j) {
        const auto& prev = table.rows.back();
        const double p = first_order + order_step * static_cast<double>(j - 1);
        const double factor = std::pow(ratio, p) - 1.0;
        std::vector<double> next(prev.size() - 1);
        for (std::size_t i = 0; i + 1 < prev.size(); ++i)
            next[i] = prev[i + 1] + (prev[i + 1] - prev[i]) / factor;
        table.rows.push_back(std::move(next));
    }
    return table;
}

double extrapolate_to_zero(std::span<const double> x, std::span<const double> y,
                           double* lower_order)
{
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("extrapolate_to_zero: size mismatch");
    std::vector<double> p(y.begin(), y.end());
    const std::size_t n = p.size();
    double previous = p.back();
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i)
            p[i] = (x[i + m] * p[i] - x[i] * p[i + 1]) / (x[i + m] - x[i]);
        // p[1] after this level covers points 1..m+1, excluding x[0].
        if (m == n - 1) break;
        previous = p[1];
    }
    if (lower_order) *lower_order = n > 1 ? previous : p[0];
    return p[0];
}

} // namespace qocc::quad
