#include "nehari/mixed_form.hpp"

#include "nehari/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace nehari {

namespace {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Rule1D gauss_legendre(int n) {
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

// Composite rule on [lo, hi] (lo <= 0 <= hi) with panels graded geometrically
// away from 0 at length scale d.
Rule1D graded_rule(double lo, double hi, double d, const Rule1D& gl) {
    Rule1D r;
    auto add_side = [&](double end) {
        const double len = std::abs(end);
        if (len == 0.0) return;
        const double sign = end > 0 ? 1.0 : -1.0;
        std::vector<double> breaks{0.0};
        double b = 0.25 * d;
        while (b < len) {
            breaks.push_back(b);
            b *= 2.0;
        }
        breaks.push_back(len);
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            const double a0 = breaks[p], a1 = breaks[p + 1];
            const double mid = 0.5 * (a0 + a1), half = 0.5 * (a1 - a0);
            for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                r.nodes.push_back(sign * (mid + half * gl.nodes[q]));
                r.weights.push_back(half * gl.weights[q]);
            }
        }
    };
    add_side(lo);
    add_side(hi);
    return r;
}

// int over an axis-aligned (N-1)-box of d / (d^2 + |z|^2)^{(N+2s)/2}, foot point at z = 0.
double face_integral(double d, const std::vector<std::pair<double, double>>& extents, double exponent,
                     const Rule1D& gl) {
    const std::size_t m = extents.size();
    if (m == 0) return d * std::pow(d * d, -exponent);
    std::vector<Rule1D> rules;
    rules.reserve(m);
    for (const auto& [lo, hi] : extents) rules.push_back(graded_rule(lo, hi, d, gl));

    // Odometer over the tensor rule; the last axis is swept innermost.
    std::vector<std::size_t> idx(m, 0);
    double total = 0.0;
    const auto& inner = rules.back();
    while (true) {
        double r2_outer = d * d;
        double w_outer = 1.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            r2_outer += rules[k].nodes[idx[k]] * rules[k].nodes[idx[k]];
            w_outer *= rules[k].weights[idx[k]];
        }
        double line = 0.0;
        for (std::size_t q = 0; q < inner.nodes.size(); ++q) {
            const double r2 = r2_outer + inner.nodes[q] * inner.nodes[q];
            line += inner.weights[q] * std::pow(r2, -exponent);
        }
        total += w_outer * line;
        if (m == 1) break;
        std::size_t k = m - 1;
        bool done = true;
        while (k-- > 0) {
            if (++idx[k] < rules[k].nodes.size()) {
                done = false;
                break;
            }
            idx[k] = 0;
        }
        if (done) break;
    }
    return d * total;
}

double killing_faces(const Grid& grid, std::span<const double> x, double s, const Rule1D& gl) {
    const int dim = grid.dim();
    const double exponent = 0.5 * (dim + 2.0 * s);
    double sum = 0.0;
    for (int a = 0; a < dim; ++a) {
        std::vector<std::pair<double, double>> extents;
        for (int k = 0; k < dim; ++k) {
            if (k == a) continue;
            const double lo = grid.center()[k] - grid.half_widths()[k] - x[k];
            const double hi = grid.center()[k] + grid.half_widths()[k] - x[k];
            extents.emplace_back(lo, hi);
        }
        const double d_lo = x[a] - (grid.center()[a] - grid.half_widths()[a]);
        const double d_hi = grid.center()[a] + grid.half_widths()[a] - x[a];
        sum += face_integral(d_lo, extents, exponent, gl);
        sum += face_integral(d_hi, extents, exponent, gl);
    }
    return sum / (2.0 * s);
}

struct ShellGeometry {
    std::vector<double> lo;       // lower corner of the shell box
    std::vector<double> step;     // lattice spacing
    std::vector<int> cells;       // lattice cells per axis
    double radius = 0.0;          // ball radius handled by quadrature
};

ShellGeometry shell_geometry(const Grid& grid, const MixedFormOptions& options) {
    const int dim = grid.dim();
    ShellGeometry g;
    double max_radius = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim; ++k) {
        const double hw = grid.half_widths()[k];
        const double step = grid.spacing()[k] / std::max(1, options.shell_refine);
        const int pad = static_cast<int>(std::ceil((options.shell_factor - 1.0) * hw / step - 1e-9));
        const double L = hw + pad * step;
        g.lo.push_back(grid.center()[k] - L);
        g.step.push_back(step);
        g.cells.push_back(static_cast<int>(std::lround(2.0 * L / step)));
        max_radius = std::min(max_radius, L - hw);
    }
    g.radius = options.tail_radius > 0.0 ? options.tail_radius : max_radius;
    if (g.radius > max_radius * (1.0 + 1e-12)) {
        throw Error(ErrorKind::InvalidArgument,
                    "tail_radius exceeds the shell margin; balls around nodes would leave the shell box");
    }
    if (!(g.radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "shell margin must be positive");
    return g;
}

double killing_shell(const Grid& grid, std::span<const double> x, double s, const ShellGeometry& g) {
    const int dim = grid.dim();
    const double exponent = 0.5 * (dim + 2.0 * s);
    double cell = 1.0;
    for (double st : g.step) cell *= st;
    std::vector<int> idx(dim, 0);
    std::vector<double> y(dim);
    const double r2max = g.radius * g.radius;
    double sum = 0.0;
    while (true) {
        bool inside = true;
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            y[k] = g.lo[k] + (idx[k] + 0.5) * g.step[k];
            if (std::abs(y[k] - grid.center()[k]) >= grid.half_widths()[k]) inside = false;
            r2 += (y[k] - x[k]) * (y[k] - x[k]);
        }
        if (!inside && r2 < r2max) sum += cell * std::pow(r2, -exponent);
        int k = dim - 1;
        while (k >= 0 && ++idx[k] == g.cells[k]) idx[k--] = 0;
        if (k < 0) break;
    }
    return sum + unit_sphere_area(dim) / (2.0 * s * std::pow(g.radius, 2.0 * s));
}

// Reflection/permutation-invariant description of where x sits in the box.
std::vector<long long> symmetry_key(const Grid& grid, std::span<const double> x) {
    std::vector<std::pair<long long, long long>> pairs;
    for (int k = 0; k < grid.dim(); ++k) {
        const double dlo = x[k] - (grid.center()[k] - grid.half_widths()[k]);
        const double dhi = grid.center()[k] + grid.half_widths()[k] - x[k];
        long long a = std::llround(dlo * 1e10), b = std::llround(dhi * 1e10);
        if (a > b) std::swap(a, b);
        pairs.emplace_back(a, b);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<long long> key;
    for (const auto& [a, b] : pairs) {
        key.push_back(a);
        key.push_back(b);
    }
    return key;
}

Eigen::VectorXd compute_killing(const Grid& grid, double s, const MixedFormOptions& options) {
    Eigen::VectorXd kappa(static_cast<Eigen::Index>(grid.size()));
    std::map<std::vector<long long>, double> memo;
    const auto gl = gauss_legendre(std::max(2, options.face_order));
    ShellGeometry shell;
    if (options.killing == KillingMethod::ShellQuadrature) shell = shell_geometry(grid, options);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto x = grid.node(i);
        auto key = symmetry_key(grid, x);
        auto it = memo.find(key);
        if (it == memo.end()) {
            const double v = options.killing == KillingMethod::BoundaryFaces ? killing_faces(grid, x, s, gl)
                                                                              : killing_shell(grid, x, s, shell);
            it = memo.emplace(std::move(key), v).first;
        }
        kappa[static_cast<Eigen::Index>(i)] = it->second;
    }
    return kappa;
}

}  // namespace

double unit_sphere_area(int dim) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double killing_coefficient(const Grid& grid, std::span<const double> x, double s, const MixedFormOptions& options) {
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0,1)");
    if (!grid.domain().contains(x)) throw Error(ErrorKind::InvalidArgument, "point lies outside the domain");
    if (options.killing == KillingMethod::BoundaryFaces) {
        return killing_faces(grid, x, s, gauss_legendre(std::max(2, options.face_order)));
    }
    return killing_shell(grid, x, s, shell_geometry(grid, options));
}

FractionalOperator::FractionalOperator(const Grid& grid, double s, Eigen::VectorXd killing)
    : s_(s), cell_volume_(grid.cell_volume()), killing_(std::move(killing)) {
    const int dim = grid.dim();
    const auto& n = grid.counts();
    const auto& h = grid.spacing();

    std::vector<std::size_t> tcount(dim), tstride(dim);
    std::size_t tsize = 1;
    for (int k = dim - 1; k >= 0; --k) {
        tcount[k] = static_cast<std::size_t>(2 * n[k] - 1);
        tstride[k] = tsize;
        tsize *= tcount[k];
    }
    table_.assign(tsize, 0.0);
    const double w2 = cell_volume_ * cell_volume_;
    const double exponent = -0.5 * (dim + 2.0 * s);
    for (std::size_t t = 0; t < tsize; ++t) {
        std::size_t rem = t;
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            const long off = static_cast<long>(rem / tstride[k]) - (n[k] - 1);
            rem %= tstride[k];
            r2 += (off * h[k]) * (off * h[k]);
        }
        table_[t] = r2 > 0.0 ? w2 * std::pow(r2, exponent) : 0.0;
    }

    const std::size_t m = grid.size();
    base_.resize(m);
    pos_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto idx = grid.multi_index(i);
        std::size_t b = 0, p = 0;
        for (int k = 0; k < dim; ++k) {
            b += static_cast<std::size_t>(n[k] - 1 - idx[k]) * tstride[k];
            p += static_cast<std::size_t>(idx[k]) * tstride[k];
        }
        base_[i] = b;
        pos_[i] = p;
    }

    row_sums_.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = table_.data() + base_[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum += row[pos_[j]];
        row_sums_[static_cast<Eigen::Index>(i)] = sum;
    }
}

Eigen::VectorXd FractionalOperator::apply(const Eigen::VectorXd& u) const {
    const std::size_t m = size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(m));
    const double* uv = u.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = table_.data() + base_[i];
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) sum += row[pos_[j]] * uv[j];
        const auto ii = static_cast<Eigen::Index>(i);
        out[ii] = 2.0 * (row_sums_[ii] + cell_volume_ * killing_[ii]) * uv[i] - 2.0 * sum;
    }
    return out;
}

Eigen::VectorXd FractionalOperator::diagonal() const {
    return 2.0 * (row_sums_ + cell_volume_ * killing_);
}

Eigen::MatrixXd FractionalOperator::to_dense() const {
    const auto m = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double* row = table_.data() + base_[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) k(i, j) = -2.0 * row[pos_[static_cast<std::size_t>(j)]];
    }
    k.diagonal() = diagonal();
    return k;
}

Eigen::SparseMatrix<double> assemble_local(const Grid& grid) {
    const int dim = grid.dim();
    const auto m = static_cast<Eigen::Index>(grid.size());
    const double w = grid.cell_volume();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(m) * (2 * dim + 1));
    for (Eigen::Index i = 0; i < m; ++i) {
        auto idx = grid.multi_index(static_cast<std::size_t>(i));
        double diag = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double c = w / (grid.spacing()[k] * grid.spacing()[k]);
            diag += 2.0 * c;  // both edges, ghost neighbours included
            for (int dir : {-1, 1}) {
                const int nb = idx[k] + dir;
                if (nb < 0 || nb >= grid.counts()[k]) continue;
                auto nidx = idx;
                nidx[k] = nb;
                trips.emplace_back(i, static_cast<Eigen::Index>(grid.flat_index(nidx)), -c);
            }
        }
        trips.emplace_back(i, i, diag);
    }
    Eigen::SparseMatrix<double> k(m, m);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

FractionalOperator assemble_fractional(const Grid& grid, double s, const MixedFormOptions& options) {
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0,1)");
    return FractionalOperator(grid, s, compute_killing(grid, s, options));
}

MixedForms MixedForms::assemble(GridPtr grid, double s, const MixedFormOptions& options,
                                const std::string& cache_dir) {
    if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::InvalidArgument, "s must lie in (0,1)");
    MixedForms forms;
    forms.grid = grid;
    forms.s = s;
    forms.options = options;
    forms.local = assemble_local(*grid);

    Eigen::VectorXd killing;
    bool cached = false;
    std::string path;
    const auto key = forms_cache_key(grid->domain(), s, options);
    if (!cache_dir.empty()) {
        std::ostringstream name;
        name << "forms_" << std::hex << key << ".bin";
        path = (std::filesystem::path(cache_dir) / name.str()).string();
        cached = load_killing_cache(path, key, killing) &&
                 static_cast<std::size_t>(killing.size()) == grid->size();
    }
    if (!cached) {
        killing = compute_killing(*grid, s, options);
        if (!path.empty()) {
            std::filesystem::create_directories(cache_dir);
            save_killing_cache(path, key, killing);
        }
    }
    forms.fractional = FractionalOperator(*grid, s, std::move(killing));
    return forms;
}

double MixedForms::tail_radius() const {
    if (options.killing == KillingMethod::ShellQuadrature) return shell_geometry(*grid, options).radius;
    return std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd MixedForms::to_dense() const {
    Eigen::MatrixXd k = fractional.to_dense();
    k += Eigen::MatrixXd(local);
    return k;
}

double rho_squared(const MixedForms& forms, const Eigen::VectorXd& u) { return u.dot(forms.apply(u)); }
double rho_squared(const MixedForms& forms, const Field& u) { return rho_squared(forms, u.values()); }

double inner_rho(const MixedForms& forms, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return u.dot(forms.apply(v));
}
double inner_rho(const MixedForms& forms, const Field& u, const Field& v) {
    return inner_rho(forms, u.values(), v.values());
}

std::uint64_t forms_cache_key(const DomainDescriptor& domain, double s, const MixedFormOptions& options) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    auto mix_double = [&](double v) { mix_bytes(&v, sizeof v); };
    auto mix_int = [&](long long v) { mix_bytes(&v, sizeof v); };
    for (double c : domain.center) mix_double(c);
    for (double w : domain.half_widths) mix_double(w);
    for (int r : domain.resolution) mix_int(r);
    mix_double(s);
    mix_int(static_cast<int>(options.killing));
    mix_int(options.face_order);
    mix_double(options.shell_factor);
    mix_double(options.tail_radius);
    mix_int(options.shell_refine);
    return h;
}

namespace {
constexpr char kCacheMagic[8] = {'N', 'H', 'K', 'I', 'L', 'L', '0', '1'};
}

void save_killing_cache(const std::string& path, std::uint64_t key, const Eigen::VectorXd& killing) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::Io, "cannot write cache " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(killing.size());
    os.write(kCacheMagic, sizeof kCacheMagic);
    os.write(reinterpret_cast<const char*>(&key), sizeof key);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(killing.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

bool load_killing_cache(const std::string& path, std::uint64_t key, Eigen::VectorXd& killing) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return false;
    char magic[8];
    std::uint64_t stored_key = 0, n = 0;
    is.read(magic, sizeof magic);
    is.read(reinterpret_cast<char*>(&stored_key), sizeof stored_key);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is || std::memcmp(magic, kCacheMagic, sizeof magic) != 0 || stored_key != key) return false;
    killing.resize(static_cast<Eigen::Index>(n));
    is.read(reinterpret_cast<char*>(killing.data()), static_cast<std::streamsize>(n * sizeof(double)));
    return static_cast<bool>(is);
}

void dump_matrix_text(const Eigen::MatrixXd& m, std::ostream& os) {
    os << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
}

}  // namespace nehari
