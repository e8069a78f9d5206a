#include "csbohm/trajectory.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <thread>

namespace csbohm {

namespace {

constexpr std::size_t kMaxSteps = 2'000'000;

// Dormand-Prince 5(4) tableau; E* are the 5th-minus-4th error weights.
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
constexpr double E1 = B1 - 5179.0 / 57600.0, E3 = B3 - 7571.0 / 16695.0, E4 = B4 - 393.0 / 640.0,
                 E5 = B5 + 92097.0 / 339200.0, E6 = B6 - 187.0 / 2100.0, E7 = -1.0 / 40.0;

using State3 = std::array<double, 3>;
using Deriv3 = std::function<State3(const State3&)>;

struct Stages3 {
    State3 y5;
    std::array<State3, 7> k;
};

// One 5th-order step; the FSAL first stage comes from the caller, the last
// stage (derivative at y5) is returned for reuse.
Stages3 dp_stages(const Deriv3& f, const State3& y, const State3& k1, double h) {
    Stages3 st{}; // zero-init: comb() multiplies not-yet-filled stages by 0
    st.k[0] = k1;
    auto comb = [&](double c1, double c2, double c3, double c4, double c5) {
        State3 out;
        for (int d = 0; d < 3; ++d)
            out[d] = y[d] + h * (c1 * st.k[0][d] + c2 * st.k[1][d] + c3 * st.k[2][d] +
                                 c4 * st.k[3][d] + c5 * st.k[4][d]);
        return out;
    };
    st.k[1] = f(comb(A21, 0.0, 0.0, 0.0, 0.0));
    st.k[2] = f(comb(A31, A32, 0.0, 0.0, 0.0));
    st.k[3] = f(comb(A41, A42, A43, 0.0, 0.0));
    st.k[4] = f(comb(A51, A52, A53, A54, 0.0));
    st.k[5] = f(comb(A61, A62, A63, A64, A65));
    for (int d = 0; d < 3; ++d)
        st.y5[d] = y[d] + h * (B1 * st.k[0][d] + B3 * st.k[2][d] + B4 * st.k[3][d] +
                               B5 * st.k[4][d] + B6 * st.k[5][d]);
    st.k[6] = f(st.y5);
    return st;
}

double scaled_error(const Stages3& st, const State3& y, double h, double tol) {
    double acc = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double e = h * (E1 * st.k[0][d] + E3 * st.k[2][d] + E4 * st.k[3][d] +
                              E5 * st.k[4][d] + E6 * st.k[5][d] + E7 * st.k[6][d]);
        const double sc = tol * (1.0 + std::max(std::abs(y[d]), std::abs(st.y5[d])));
        acc += (e / sc) * (e / sc);
    }
    return std::sqrt(acc / 3.0);
}

double step_scale(double err) {
    if (err <= 0.0) return 5.0;
    return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

// One unit-speed curve family: derivative, the scalar whose sign flip marks a
// turning, and the box the curve lives in. state = (t, x, aux).
struct Curve3Setup {
    Deriv3 deriv;
    std::function<double(const State3&)> flip;
    double arm_eps = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    double x_lo = 0.0, x_hi = 0.0;
    double span = std::numeric_limits<double>::infinity();     // limit on aux
    double span_arc = std::numeric_limits<double>::infinity(); // limit on (t,x) arc length
    double tol = kTrajectoryTol;
    double h0 = 0.0, h_max = 0.0;
    double gap = 0.0, spacing = 0.0; // snapshot stride check
};

void append_point(WorldLine& line, const State3& y) {
    line.t.push_back(y[0]);
    line.x.push_back(y[1]);
    line.lambda.push_back(y[2]); // aux; remapped by the Dirac caller
}

void fill_character(WorldLine& line) {
    line.segment_character.clear();
    if (line.size() < 2) return;
    line.segment_character.reserve(line.size() - 1);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double dt = line.t[i + 1] - line.t[i];
        const double dx = line.x[i + 1] - line.x[i];
        const double q = dt * dt - dx * dx;
        // binary per segment: null segments count as spacelike
        line.segment_character.push_back(q > 0.0 ? CausalCharacter::timelike
                                                 : CausalCharacter::spacelike);
    }
}

void check_resolution(WorldLine& line, double gap, double spacing) {
    if (gap <= 0.0) return;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double dt = std::abs(line.t[i + 1] - line.t[i]);
        const double dx = std::abs(line.x[i + 1] - line.x[i]);
        if (dt >= 0.1 * gap && dx / dt * gap > 0.5 * spacing) {
            line.resolution_warning = true;
            if (!line.note.empty()) line.note += "; ";
            line.note += "snapshot stride too coarse for the encountered velocity";
            return;
        }
    }
}

// Shared driver for the lambda-parametrized and Dirac integrators.
WorldLine run_curve3(const Curve3Setup& c, double t0, double x0) {
    WorldLine line;
    State3 y{t0, x0, 0.0};
    append_point(line, y);

    State3 k1 = c.deriv(y);
    int ref = 0;
    if (c.flip) {
        const double f0 = c.flip(y);
        if (std::abs(f0) > c.arm_eps) ref = sgn(f0);
    }
    const double h_floor = 1e-14 * (1.0 + (c.t_hi - c.t_lo) + (c.x_hi - c.x_lo));
    double h = c.h0;
    double s_total = 0.0; // (t,x) arc length; the driver moves at unit speed in s
    bool terminated = false;

    for (std::size_t step = 0; step < kMaxSteps && !terminated; ++step) {
        h = std::clamp(h, h_floor, c.h_max);
        const Stages3 st = dp_stages(c.deriv, y, k1, h);
        const double err = scaled_error(st, y, h, c.tol);
        if (err > 1.0) {
            if (h <= 2.0 * h_floor) {
                line.status = LineStatus::failed;
                line.note = "step size underflow";
                terminated = true;
                break;
            }
            h *= step_scale(err);
            continue;
        }

        auto partial = [&](double s) { return dp_stages(c.deriv, y, k1, s).y5; };
        // First s in (0, h] where g leaves the `inside` sign, located by
        // bisection along the step.
        auto bisect = [&](const std::function<double(const State3&)>& g, double lo, double hi,
                          int inside) {
            while (hi - lo > 1e-13 * h) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(partial(mid));
                if (gm == 0.0 || sgn(gm) == inside)
                    lo = mid;
                else
                    hi = mid;
            }
            return hi;
        };

        double s_event = h;
        double ev_bound = 0.0; // boundary value the event point is snapped onto
        enum class Ev { none, turning, window_lo, window_hi, grid, span, arc } ev = Ev::none;

        if (c.flip && ref != 0) {
            const double fm = c.flip(partial(0.5 * h));
            const double f1 = c.flip(st.y5);
            double lo = -1.0, hi = -1.0;
            if (fm * static_cast<double>(ref) < 0.0) {
                lo = 0.0;
                hi = 0.5 * h;
            } else if (f1 * static_cast<double>(ref) < 0.0) {
                lo = 0.5 * h;
                hi = h;
            }
            if (lo >= 0.0) {
                const double s = bisect([&](const State3& p) { return c.flip(p); }, lo, hi, ref);
                if (s < s_event) {
                    s_event = s;
                    ev = Ev::turning;
                }
            }
        }
        if (st.y5[0] > c.t_hi || st.y5[0] < c.t_lo) {
            const bool top = st.y5[0] > c.t_hi;
            const double bound = top ? c.t_hi : c.t_lo;
            const double s =
                bisect([&](const State3& p) { return p[0] - bound; }, 0.0, h, top ? -1 : 1);
            if (s < s_event) {
                s_event = s;
                ev = top ? Ev::window_hi : Ev::window_lo;
                ev_bound = bound;
            }
        }
        if (st.y5[1] > c.x_hi || st.y5[1] < c.x_lo) {
            const bool right = st.y5[1] > c.x_hi;
            const double bound = right ? c.x_hi : c.x_lo;
            const double s =
                bisect([&](const State3& p) { return p[1] - bound; }, 0.0, h, right ? -1 : 1);
            if (s < s_event) {
                s_event = s;
                ev = Ev::grid;
            }
        }
        if (st.y5[2] >= c.span) {
            const double s = bisect([&](const State3& p) { return p[2] - c.span; }, 0.0, h, -1);
            if (s < s_event) {
                s_event = s;
                ev = Ev::span;
            }
        }
        if (s_total + h >= c.span_arc) {
            const double s = c.span_arc - s_total;
            if (s < s_event) {
                s_event = s;
                ev = Ev::arc;
            }
        }

        switch (ev) {
        case Ev::none:
            y = st.y5;
            k1 = st.k[6];
            s_total += h;
            append_point(line, y);
            if (c.flip && ref == 0) {
                const double f = c.flip(y);
                if (std::abs(f) > c.arm_eps) ref = sgn(f);
            }
            h *= step_scale(err);
            break;
        case Ev::turning:
            y = partial(s_event);
            s_total += s_event;
            append_point(line, y);
            line.turning_points.push_back(line.size() - 1);
            ref = 0; // re-arms once the flip scalar clears the band again
            k1 = c.deriv(y);
            break;
        case Ev::window_lo:
        case Ev::window_hi: {
            State3 p = partial(s_event);
            p[0] = ev_bound; // bisection stops just past the edge; land on it
            append_point(line, p);
            line.status = LineStatus::window_edge;
            line.note = ev == Ev::window_hi ? "left through the top of the time window"
                                            : "left through the bottom of the time window";
            terminated = true;
            break;
        }
        case Ev::grid: {
            State3 p = partial(s_event);
            p[1] = std::clamp(p[1], c.x_lo, c.x_hi);
            append_point(line, p);
            line.status = LineStatus::left_grid;
            line.note = "curve left the spatial grid at t = " + std::to_string(p[0]);
            terminated = true;
            break;
        }
        case Ev::span: {
            State3 p = partial(s_event);
            p[2] = c.span;
            append_point(line, p);
            line.status = LineStatus::completed;
            line.note = "parameter span reached";
            terminated = true;
            break;
        }
        case Ev::arc: {
            append_point(line, partial(s_event));
            line.status = LineStatus::failed;
            line.note = "arc budget exhausted";
            terminated = true;
            break;
        }
        }
    }
    if (!terminated) {
        line.status = LineStatus::failed;
        line.note = "step budget exhausted";
    }
    check_resolution(line, c.gap, c.spacing);
    return line;
}

void require_inside(const FieldInterpolator& f, double t0, double x0, const char* where) {
    const double ttol = 1e-9 * (1.0 + f.t_max() - f.t_min());
    if (t0 < f.t_min() - ttol || t0 > f.t_max() + ttol)
        throw LeftTimeWindow(std::string(where) + ": seed time outside the record window");
    const Grid1D& g = f.grid();
    if (x0 < g.origin || x0 > g.origin + g.length())
        throw LeftGrid(std::string(where) + ": seed position outside the grid");
}

WorldLine lambda_core(const FieldInterpolator& interp, double t0, double x0, double lambda_span,
                      double tol, double t_lo, double t_hi,
                      double arc_cap = std::numeric_limits<double>::infinity()) {
    require_inside(interp, t0, x0, "integrate_lambda_param");
    {
        const FlowSample s = interp.sample(t0, x0);
        if (std::hypot(s.rho, s.j) < interp.eps_turn())
            throw StagnationPoint("integrate_lambda_param: rho and j both vanish at the seed");
    }
    const Grid1D& g = interp.grid();
    Curve3Setup c;
    c.deriv = [&interp](const State3& y) {
        const double t = std::clamp(y[0], interp.t_min(), interp.t_max());
        const FlowSample s = interp.sample(t, y[1]);
        const double n = std::hypot(s.rho, s.j);
        if (n < interp.eps_turn())
            throw StagnationPoint("flow direction undefined: rho and j both below eps_turn");
        return State3{s.rho / n, s.j / n, 1.0 / n};
    };
    c.flip = [&interp](const State3& y) {
        const double t = std::clamp(y[0], interp.t_min(), interp.t_max());
        return interp.sample(t, y[1]).rho;
    };
    c.arm_eps = interp.eps_turn();
    c.t_lo = t_lo;
    c.t_hi = t_hi;
    c.x_lo = g.origin;
    c.x_hi = g.origin + g.length();
    c.span = lambda_span;
    c.span_arc = arc_cap;
    c.tol = tol;
    c.h0 = 0.25 * g.spacing;
    c.h_max = 2.0 * g.spacing;
    c.gap = interp.snapshot_gap();
    c.spacing = g.spacing;

    return proper_time(run_curve3(c, t0, x0));
}

} // namespace

WorldLine proper_time(WorldLine line) {
    line.tau.assign(line.size(), 0.0);
    fill_character(line);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double dt = line.t[i + 1] - line.t[i];
        const double dx = line.x[i + 1] - line.x[i];
        line.tau[i + 1] = line.tau[i] + std::sqrt(std::abs(dt * dt - dx * dx));
    }
    return line;
}

WorldLine integrate_lambda_param(const FieldInterpolator& interp, double t0, double x0,
                                 double lambda_span, double tol) {
    return lambda_core(interp, t0, x0, lambda_span, tol, interp.t_min(), interp.t_max());
}

WorldLine integrate_time_param(const FieldInterpolator& interp, double x0, double t_start,
                               double t_end, TurningPolicy policy, double tol) {
    if (!(t_end > t_start))
        throw ConfigError("integrate_time_param: t_end must exceed t_start");
    require_inside(interp, t_start, x0, "integrate_time_param");
    const double ttol = 1e-9 * (1.0 + interp.t_max() - interp.t_min());
    if (t_end > interp.t_max() + ttol)
        throw LeftTimeWindow("integrate_time_param: t_end beyond the record window");

    if (policy == TurningPolicy::switch_to_lambda) {
        // Closed flow orbits never reach a window edge, so cap the (t,x) arc
        // length at a few circuits of the window instead of cycling forever.
        // The cap must be on arc, not on lambda: lambda accumulates as 1/|(rho,j)|
        // and can blow through any fixed budget in one low-density crossing.
        const double arc_cap = 8.0 * ((t_end - t_start) + interp.grid().length());
        return lambda_core(interp, t_start, x0, std::numeric_limits<double>::infinity(), tol,
                           t_start, t_end, arc_cap);
    }

    WorldLine line;
    auto push = [&](double pt, double px) {
        line.t.push_back(pt);
        line.x.push_back(px);
        line.lambda.push_back(pt - t_start);
    };
    auto finish = [&](LineStatus status, const std::string& note) {
        line.status = status;
        line.note = note;
        line = proper_time(std::move(line));
        check_resolution(line, interp.snapshot_gap(), interp.grid().spacing);
        return line;
    };
    auto abort_turning = [&](double at_t) {
        return TurningPointEncountered(
            "turning point: |rho| fell below eps_turn at t = " + std::to_string(at_t),
            finish(LineStatus::turning_error, "aborted at a turning point"));
    };

    const Grid1D& g = interp.grid();
    const double x_lo = g.origin, x_hi = g.origin + g.length();
    auto v_at = [&](double qt, double qx) -> std::optional<double> {
        const FlowSample s = interp.sample(std::min(qt, interp.t_max()), qx);
        if (!s.v_defined) return std::nullopt;
        return s.v;
    };

    double t = t_start, x = x0;
    push(t, x);
    std::optional<double> first = v_at(t, x);
    if (!first) throw abort_turning(t);
    double k1 = *first;

    const double span = t_end - t_start;
    const double h_floor = 1e-14 * (1.0 + span);
    const double h_max = interp.snapshot_gap() > 0.0 ? interp.snapshot_gap() : 0.25 * span;
    double h = std::min(h_max, span / 20.0);

    for (std::size_t step = 0; step < kMaxSteps; ++step) {
        h = std::clamp(h, h_floor, std::min(h_max, t_end - t));
        std::array<double, 7> k{};
        k[0] = k1;
        bool undefined = false;
        auto eval = [&](double tfrac, double dx) {
            const std::optional<double> v = v_at(t + tfrac * h, x + h * dx);
            if (!v) undefined = true;
            return v.value_or(0.0);
        };
        k[1] = eval(1.0 / 5.0, A21 * k[0]);
        if (!undefined) k[2] = eval(3.0 / 10.0, A31 * k[0] + A32 * k[1]);
        if (!undefined) k[3] = eval(4.0 / 5.0, A41 * k[0] + A42 * k[1] + A43 * k[2]);
        if (!undefined)
            k[4] = eval(8.0 / 9.0, A51 * k[0] + A52 * k[1] + A53 * k[2] + A54 * k[3]);
        if (!undefined)
            k[5] = eval(1.0, A61 * k[0] + A62 * k[1] + A63 * k[2] + A64 * k[3] + A65 * k[4]);
        if (undefined) throw abort_turning(t);

        const double x5 = x + h * (B1 * k[0] + B3 * k[2] + B4 * k[3] + B5 * k[4] + B6 * k[5]);
        const std::optional<double> k7 = v_at(t + h, x5);
        if (!k7) {
            push(t + h, x5);
            throw abort_turning(t + h);
        }
        k[6] = *k7;
        const double e =
            h * (E1 * k[0] + E3 * k[2] + E4 * k[3] + E5 * k[4] + E6 * k[5] + E7 * k[6]);
        const double sc = tol * (1.0 + std::max(std::abs(x), std::abs(x5)));
        const double err = std::abs(e) / sc;
        if (err > 1.0) {
            if (h <= 2.0 * h_floor) {
                // The controller only grinds to a halt where v = j/rho blows
                // up, i.e. approaching a density zero; a smooth field never
                // drives h to the floor. Classify by how small rho got.
                const double rho_scale = interp.eps_turn() / kEpsilonTurnRel;
                const FlowSample s = interp.sample(t, x);
                if (std::abs(s.rho) < 1e-3 * rho_scale) throw abort_turning(t);
                return finish(LineStatus::failed, "step size underflow");
            }
            h *= step_scale(err);
            continue;
        }
        if (x5 < x_lo || x5 > x_hi) {
            const double xb = std::clamp(x5, x_lo, x_hi);
            const double frac = x5 != x ? (xb - x) / (x5 - x) : 1.0;
            push(t + frac * h, xb);
            return finish(LineStatus::left_grid,
                          "curve left the spatial grid at t = " + std::to_string(t + frac * h));
        }
        t += h;
        x = x5;
        k1 = k[6];
        push(t, x);
        if (t >= t_end - 1e-12 * (1.0 + std::abs(t_end))) {
            line.t.back() = t_end; // land on the endpoint exactly
            return finish(LineStatus::completed, "");
        }
        h *= step_scale(err);
    }
    return finish(LineStatus::failed, "step budget exhausted");
}

WorldLine dirac_trajectory(const SpinorInterpolator& interp, double t0, double x0,
                           double tau_span, double tol) {
    const double ttol = 1e-9 * (1.0 + interp.t_max() - interp.t_min());
    if (t0 < interp.t_min() - ttol || t0 > interp.t_max() + ttol)
        throw LeftTimeWindow("dirac_trajectory: seed time outside the record window");
    const Grid1D& g = interp.grid();
    if (x0 < g.origin || x0 > g.origin + g.length())
        throw LeftGrid("dirac_trajectory: seed position outside the grid");
    {
        const DiracSample s = interp.sample(t0, x0);
        if (s.rho0 < interp.eps_turn())
            throw RestDensityVanishes("dirac_trajectory: rho0 below eps_turn at the seed");
    }
    Curve3Setup c;
    c.deriv = [&interp](const State3& y) {
        const double t = std::clamp(y[0], interp.t_min(), interp.t_max());
        const DiracSample s = interp.sample(t, y[1]);
        const double n = std::hypot(s.j0, s.j1);
        if (n < interp.eps_turn())
            throw StagnationPoint("flow direction undefined: 4-current vanishes");
        return State3{s.j0 / n, s.j1 / n, s.rho0 / n};
    };
    c.flip = [&interp](const State3& y) {
        const double t = std::clamp(y[0], interp.t_min(), interp.t_max());
        return interp.sample(t, y[1]).j0;
    };
    c.arm_eps = interp.eps_turn();
    c.t_lo = interp.t_min();
    c.t_hi = interp.t_max();
    c.x_lo = g.origin;
    c.x_hi = g.origin + g.length();
    c.span = tau_span;
    c.tol = tol;
    c.h0 = 0.25 * g.spacing;
    c.h_max = 2.0 * g.spacing;
    for (std::size_t m = 0; m + 1 < interp.slice_count(); ++m)
        c.gap = std::max(c.gap, interp.slice(m + 1).time - interp.slice(m).time);
    c.spacing = g.spacing;

    WorldLine line = run_curve3(c, t0, x0);
    // aux accumulated proper time; rebuild lambda as the chordal arc length
    // so it stays strictly increasing even across lightlike stretches.
    line.tau = line.lambda;
    line.lambda.assign(line.size(), 0.0);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double dt = line.t[i + 1] - line.t[i];
        const double dx = line.x[i + 1] - line.x[i];
        line.lambda[i + 1] = line.lambda[i] + std::hypot(dt, dx);
    }
    fill_character(line);
    return line;
}

std::vector<WorldLine> ensemble(const FieldInterpolator& interp, const std::vector<Seed>& seeds,
                                const EnsembleOptions& opt) {
    std::vector<WorldLine> out(seeds.size());
    if (seeds.empty()) return out;
    std::atomic<std::size_t> next{0};

    auto run_one = [&](std::size_t i) {
        WorldLine line;
        try {
            if (opt.mode == ParamMode::time)
                line = integrate_time_param(interp, seeds[i].x, interp.t_min(), interp.t_max(),
                                            opt.on_turning, opt.tol);
            else
                line = integrate_lambda_param(interp, interp.t_min(), seeds[i].x, opt.lambda_span,
                                              opt.tol);
        } catch (const TurningPointEncountered& e) {
            line = e.partial;
            line.status = LineStatus::turning_error;
            line.note = e.what();
        } catch (const LeftGrid& e) {
            line.status = LineStatus::left_grid;
            line.note = e.what();
        } catch (const StagnationPoint& e) {
            line.status = LineStatus::stagnation;
            line.note = e.what();
        } catch (const std::exception& e) {
            line.status = LineStatus::failed;
            line.note = e.what();
        }
        if (line.size() == 0) {
            // exceptions without a partial curve still leave a one-point line
            line.t = {interp.t_min()};
            line.x = {seeds[i].x};
            line.lambda = {0.0};
            line = proper_time(std::move(line));
        }
        line.weight = seeds[i].weight;
        out[i] = std::move(line);
    };

    unsigned nthreads = opt.threads ? opt.threads : std::thread::hardware_concurrency();
    nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(seeds.size())));
    if (nthreads == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
        return out;
    }
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned w = 0; w < nthreads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < seeds.size(); i = next.fetch_add(1))
                run_one(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

std::vector<Seed> sample_seeds(const GuidanceField& slice, std::size_t count,
                               std::uint64_t rng_seed) {
    const Grid1D& g = slice.grid;
    std::vector<double> cdf(g.n);
    double total = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        total += std::abs(slice.density[i]);
        cdf[i] = total;
    }
    if (!(total > 0.0))
        throw StructuralError("sample_seeds: density vanishes identically on the slice");

    std::mt19937_64 rng(rng_seed);
    // 53-bit uniform in [0,1); std::uniform_real_distribution is not
    // bit-stable across library implementations.
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<Seed> seeds(count);
    for (auto& s : seeds) {
        const double u = uniform() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t cell =
            std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), g.n - 1);
        double x = g.x(cell) + (uniform() - 0.5) * g.spacing;
        if (x < g.origin) x += g.length();
        if (x > g.origin + g.length()) x -= g.length();
        s.x = x;
        s.weight = slice.density[cell] < 0.0 ? -1.0 : 1.0;
    }
    return seeds;
}

} // namespace csbohm
