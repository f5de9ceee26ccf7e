#include "stochtube/system_model.hpp"

#include <cmath>
#include <stdexcept>

namespace stochtube {

namespace {

void require_finite(const Eigen::VectorXd& v, const std::string& what, double t) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw std::runtime_error("model evaluation error: non-finite " + what +
                                     " component " + std::to_string(i) + " at t=" +
                                     std::to_string(t));
    }
}

void require_finite(const Eigen::MatrixXd& m, const std::string& what, double t) {
    if (!m.allFinite())
        throw std::runtime_error("model evaluation error: non-finite entry in " + what +
                                 " at t=" + std::to_string(t));
}

double get_param(const ParamMap& params, const std::string& key, const std::string& system) {
    const auto it = params.find(key);
    if (it == params.end())
        throw std::invalid_argument("builtin " + system + ": missing parameter '" + key + "'");
    return it->second;
}

void reject_unknown(const ParamMap& params, std::initializer_list<const char*> known,
                    const std::string& system) {
    for (const auto& [key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("builtin " + system + ": unknown parameter '" + key + "'");
    }
}

}  // namespace

Eigen::VectorXd eval_drift(const SystemModel& model, const Eigen::VectorXd& x, double t) {
    if (x.size() != model.state_dim)
        throw std::invalid_argument("eval_drift: state dimension mismatch");
    if (!model.drift) throw std::invalid_argument("eval_drift: model has no drift");
    Eigen::VectorXd u = model.input(t);
    Eigen::VectorXd dx(model.state_dim);
    model.drift(x, u, t, dx);
    require_finite(dx, "drift", t);
    return dx;
}

Eigen::MatrixXd eval_jacobian(const SystemModel& model, const Eigen::VectorXd& x, double t,
                              double h) {
    if (x.size() != model.state_dim)
        throw std::invalid_argument("eval_jacobian: state dimension mismatch");
    const int n = model.state_dim;
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd u = model.input(t);
    if (model.jacobian) {
        model.jacobian(x, u, t, jac);
    } else {
        if (!(h > 0.0)) throw std::invalid_argument("eval_jacobian: finite-difference step must be > 0");
        Eigen::VectorXd xp = x, xm = x, fp(n), fm(n);
        for (int j = 0; j < n; ++j) {
            xp[j] = x[j] + h;
            xm[j] = x[j] - h;
            model.drift(xp, u, t, fp);
            model.drift(xm, u, t, fm);
            jac.col(j) = (fp - fm) / (2.0 * h);
            xp[j] = x[j];
            xm[j] = x[j];
        }
    }
    require_finite(jac, "state jacobian", t);
    return jac;
}

Eigen::MatrixXd eval_input_jacobian(const SystemModel& model, const Eigen::VectorXd& x, double t,
                                    double h) {
    if (x.size() != model.state_dim)
        throw std::invalid_argument("eval_input_jacobian: state dimension mismatch");
    const int n = model.state_dim;
    const int p = model.input_dim;
    Eigen::MatrixXd jac(n, p);
    Eigen::VectorXd u = model.input(t);
    if (model.input_jacobian) {
        model.input_jacobian(x, u, t, jac);
    } else {
        if (!(h > 0.0))
            throw std::invalid_argument("eval_input_jacobian: finite-difference step must be > 0");
        Eigen::VectorXd up = u, um = u, fp(n), fm(n);
        for (int j = 0; j < p; ++j) {
            up[j] = u[j] + h;
            um[j] = u[j] - h;
            model.drift(x, up, t, fp);
            model.drift(x, um, t, fm);
            jac.col(j) = (fp - fm) / (2.0 * h);
            up[j] = u[j];
            um[j] = u[j];
        }
    }
    require_finite(jac, "input jacobian", t);
    return jac;
}

BuiltinSystem builtin_from_string(const std::string& name) {
    if (name == "ou") return BuiltinSystem::Ou;
    if (name == "ltv_decay") return BuiltinSystem::LtvDecay;
    if (name == "pvtol") return BuiltinSystem::Pvtol;
    throw std::invalid_argument("unknown builtin system '" + name + "'");
}

std::string to_string(BuiltinSystem name) {
    switch (name) {
        case BuiltinSystem::Ou: return "ou";
        case BuiltinSystem::LtvDecay: return "ltv_decay";
        case BuiltinSystem::Pvtol: return "pvtol";
    }
    return "?";
}

namespace {

SystemModel make_ou(const ParamMap& params) {
    reject_unknown(params, {"c", "sigma"}, "ou");
    const double c = get_param(params, "c", "ou");
    const double sigma = get_param(params, "sigma", "ou");
    SystemModel m;
    m.name = "ou";
    m.state_dim = 1;
    m.input_dim = 0;
    m.sigma = sigma;
    m.input = InputSignal(0);
    m.drift = [c](const Eigen::VectorXd& x, const Eigen::VectorXd&, double, Eigen::VectorXd& dx) {
        dx[0] = c * x[0];
    };
    m.jacobian = [c](const Eigen::VectorXd&, const Eigen::VectorXd&, double, Eigen::MatrixXd& jac) {
        jac(0, 0) = c;
    };
    return m;
}

SystemModel make_ltv_decay(const ParamMap& params) {
    reject_unknown(params, {"base", "amp", "sigma"}, "ltv_decay");
    const double base = get_param(params, "base", "ltv_decay");
    const double amp = get_param(params, "amp", "ltv_decay");
    const double sigma = get_param(params, "sigma", "ltv_decay");
    SystemModel m;
    m.name = "ltv_decay";
    m.state_dim = 2;
    m.input_dim = 0;
    m.sigma = sigma;
    m.input = InputSignal(0);
    // A_t = (base - amp sin t) I + [[0, 2], [-2, 0]]; the skew part leaves the
    // symmetric part diagonal, so the decay rate is base - amp sin t exactly.
    m.drift = [base, amp](const Eigen::VectorXd& x, const Eigen::VectorXd&, double t,
                          Eigen::VectorXd& dx) {
        const double a = base - amp * std::sin(t);
        dx[0] = a * x[0] + 2.0 * x[1];
        dx[1] = -2.0 * x[0] + a * x[1];
    };
    m.jacobian = [base, amp](const Eigen::VectorXd&, const Eigen::VectorXd&, double t,
                             Eigen::MatrixXd& jac) {
        const double a = base - amp * std::sin(t);
        jac(0, 0) = a;
        jac(0, 1) = 2.0;
        jac(1, 0) = -2.0;
        jac(1, 1) = a;
    };
    return m;
}

// State (px, pz, phi, vx, vz, omega) with body-frame velocities; inputs are
// the two rotor thrusts.
SystemModel make_pvtol(const ParamMap& params) {
    reject_unknown(params, {"m", "J", "l", "g", "sigma"}, "pvtol");
    const double mass = get_param(params, "m", "pvtol");
    const double inertia = get_param(params, "J", "pvtol");
    const double arm = get_param(params, "l", "pvtol");
    const double grav = get_param(params, "g", "pvtol");
    const double sigma = get_param(params, "sigma", "pvtol");
    if (mass <= 0.0 || inertia <= 0.0 || arm <= 0.0)
        throw std::invalid_argument("builtin pvtol: m, J, l must be positive");
    SystemModel m;
    m.name = "pvtol";
    m.state_dim = 6;
    m.input_dim = 2;
    m.sigma = sigma;
    m.input = InputSignal::constant(Eigen::Vector2d(mass * grav / 2.0, mass * grav / 2.0));
    m.drift = [mass, inertia, arm, grav](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         double, Eigen::VectorXd& dx) {
        const double phi = x[2], vx = x[3], vz = x[4], om = x[5];
        const double c = std::cos(phi), s = std::sin(phi);
        dx[0] = vx * c - vz * s;
        dx[1] = vx * s + vz * c;
        dx[2] = om;
        dx[3] = vz * om - grav * s;
        dx[4] = -vx * om - grav * c + (u[0] + u[1]) / mass;
        dx[5] = arm * (u[0] - u[1]) / inertia;
    };
    m.jacobian = [grav](const Eigen::VectorXd& x, const Eigen::VectorXd&, double,
                        Eigen::MatrixXd& jac) {
        const double phi = x[2], vx = x[3], vz = x[4], om = x[5];
        const double c = std::cos(phi), s = std::sin(phi);
        jac.setZero();
        jac(0, 2) = -vx * s - vz * c;
        jac(0, 3) = c;
        jac(0, 4) = -s;
        jac(1, 2) = vx * c - vz * s;
        jac(1, 3) = s;
        jac(1, 4) = c;
        jac(2, 5) = 1.0;
        jac(3, 2) = -grav * c;
        jac(3, 4) = om;
        jac(3, 5) = vz;
        jac(4, 2) = grav * s;
        jac(4, 3) = -om;
        jac(4, 5) = -vx;
    };
    m.input_jacobian = [mass, inertia, arm](const Eigen::VectorXd&, const Eigen::VectorXd&,
                                            double, Eigen::MatrixXd& jac) {
        jac.setZero();
        jac(4, 0) = 1.0 / mass;
        jac(4, 1) = 1.0 / mass;
        jac(5, 0) = arm / inertia;
        jac(5, 1) = -arm / inertia;
    };
    return m;
}

}  // namespace

SystemModel make_builtin(BuiltinSystem name, const ParamMap& params) {
    SystemModel m;
    switch (name) {
        case BuiltinSystem::Ou: m = make_ou(params); break;
        case BuiltinSystem::LtvDecay: m = make_ltv_decay(params); break;
        case BuiltinSystem::Pvtol: m = make_pvtol(params); break;
    }
    if (m.sigma < 0.0) throw std::invalid_argument("builtin: sigma must be >= 0");
    return m;
}

SystemModel make_builtin(const std::string& name, const ParamMap& params) {
    return make_builtin(builtin_from_string(name), params);
}

}  // namespace stochtube
