#include "prbm/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <memory>
#include <string>

#include "prbm/error.hpp"

namespace prbm {

namespace {

// GSL calls back through a C pointer; exceptions thrown by the integrand are
// parked here and rethrown once GSL returns.
struct Callback {
    const Integrand* f;
    std::exception_ptr error;
};

double trampoline(double x, void* params) {
    auto* cb = static_cast<Callback*>(params);
    if (cb->error) return 0.0;
    try {
        return (*cb->f)(x);
    } catch (...) {
        cb->error = std::current_exception();
        return 0.0;
    }
}

struct Workspace {
    explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
    ~Workspace() { gsl_integration_workspace_free(w); }
    gsl_integration_workspace* w;
};

void disable_gsl_abort() {
    static const bool once = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)once;
}

void check(int status, const Callback& cb, const char* what) {
    if (cb.error) std::rethrow_exception(cb.error);
    // Roundoff warnings mean the requested tolerance was not reached exactly,
    // but the estimate is still the best available.
    if (status == GSL_SUCCESS || status == GSL_EROUND) return;
    fail(ErrorKind::SlowConvergence, std::string(what) + ": " + gsl_strerror(status));
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double lo, double hi, const QuadratureConfig& cfg) {
    disable_gsl_abort();
    Callback cb{&f, nullptr};
    gsl_function F{&trampoline, &cb};
    Workspace ws(cfg.max_subdivisions);
    QuadratureResult r;
    const int st = gsl_integration_qags(&F, lo, hi, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions, ws.w, &r.value, &r.abs_error);
    check(st, cb, "qags");
    return r;
}

QuadratureResult integrate_with_breaks(const Integrand& f, std::vector<double> points, const QuadratureConfig& cfg) {
    disable_gsl_abort();
    Callback cb{&f, nullptr};
    gsl_function F{&trampoline, &cb};
    Workspace ws(cfg.max_subdivisions);
    QuadratureResult r;
    const int st = gsl_integration_qagp(&F, points.data(), points.size(), cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions,
                                        ws.w, &r.value, &r.abs_error);
    check(st, cb, "qagp");
    return r;
}

QuadratureResult integrate_to_infinity(const Integrand& f, double lo, const QuadratureConfig& cfg) {
    disable_gsl_abort();
    Callback cb{&f, nullptr};
    gsl_function F{&trampoline, &cb};
    Workspace ws(cfg.max_subdivisions);
    QuadratureResult r;
    const int st = gsl_integration_qagiu(&F, lo, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions, ws.w, &r.value, &r.abs_error);
    check(st, cb, "qagiu");
    return r;
}

QuadratureResult integrate_real_line(const Integrand& f, const QuadratureConfig& cfg) {
    disable_gsl_abort();
    Callback cb{&f, nullptr};
    gsl_function F{&trampoline, &cb};
    Workspace ws(cfg.max_subdivisions);
    QuadratureResult r;
    const int st = gsl_integration_qagi(&F, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions, ws.w, &r.value, &r.abs_error);
    check(st, cb, "qagi");
    return r;
}

QuadratureResult integrate_fourier_cos(const Integrand& f, double omega, const QuadratureConfig& cfg) {
    disable_gsl_abort();
    Callback cb{&f, nullptr};
    gsl_function F{&trampoline, &cb};
    const std::size_t n = cfg.max_subdivisions;
    Workspace ws(n), cycle(n);
    std::unique_ptr<gsl_integration_qawo_table, decltype(&gsl_integration_qawo_table_free)> table(
        gsl_integration_qawo_table_alloc(omega, 1.0, GSL_INTEG_COSINE, 25), &gsl_integration_qawo_table_free);
    QuadratureResult r;
    // qawf requires an absolute tolerance.
    const double eps = cfg.abs_tol > 0 ? cfg.abs_tol : cfg.rel_tol;
    const int st = gsl_integration_qawf(&F, 0.0, eps, n, ws.w, cycle.w, table.get(), &r.value, &r.abs_error);
    check(st, cb, "qawf");
    return r;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    require(n >= 1, ErrorKind::InvalidParam, "Gauss-Legendre order must be >= 1");
    std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> t(
        gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &nodes[i], &weights[i], t.get());
}

}  // namespace prbm
