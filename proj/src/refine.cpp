#include "mvpr/refine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvpr/errors.hpp"
#include "mvpr/parallel.hpp"

namespace mvpr {

RefineConfig RefineConfig::defaults_for(const TriMesh& mesh) {
    RefineConfig cfg;
    const double radius = mesh.bounding_radius();
    if (radius > 0.0) cfg.lr_translation = 0.01 * radius;
    return cfg;
}

void RefineConfig::validate() const {
    if (k < 1) throw InputError("refine config: k must be >= 1");
    if (n_best < 1 || static_cast<long>(n_best) > static_cast<long>(k) * k * k)
        throw InputError("refine config: n_best must be in [1, k^3]");
    if (fine_rounds < 1 || fine_subdiv < 1)
        throw InputError("refine config: fine_rounds and fine_subdiv must be >= 1");
    if (max_iters < 0) throw InputError("refine config: max_iters must be >= 0");
    if (!(lr_translation > 0.0) || !(lr_rotation > 0.0) || !(lr_log_scale > 0.0))
        throw InputError("refine config: learning rates must be positive");
    if (!(rel_tol > 0.0)) throw InputError("refine config: rel_tol must be positive");
    if (patience < 1) throw InputError("refine config: patience must be >= 1");
    weights.validate();
    if (weights.lambda1 == 0.0 && weights.lambda2 == 0.0)
        throw InputError("refine config: loss weights cannot both be zero");
    if (weights.lambda2 > 0.0 && weights.lambda1 == 0.0)
        throw InputError("refine config: the chamfer term needs lambda1 > 0 to pin overall extent");
    soft.validate();
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw InputError("refine config: adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw InputError("refine config: adam_eps must be positive");
    if (t0 && !t0->allFinite()) throw InputError("refine config: t0 must be finite");
    if (s0 && !(s0->allFinite() && s0->minCoeff() > 0.0))
        throw InputError("refine config: s0 must be finite and positive");
}

namespace {

EulerBin make_bin(int i, int j, int l, int k) {
    EulerBin bin;
    bin.index = {i, j, l};
    const double width = 2.0 * M_PI / k;
    bin.center = Vec3(-M_PI + (i + 0.5) * width,
                      -M_PI + (j + 0.5) * width,
                      -M_PI + (l + 0.5) * width);
    bin.half_width = M_PI / k;
    return bin;
}

Pose pose_at(const Rotation& r, const Vec3& t, const Vec3& s) {
    Pose p;
    p.scale = s;
    p.rotation = r;
    p.translation = t;
    return p;
}

}  // namespace

std::vector<std::pair<EulerBin, double>> coarse_bin_search(const TriMesh& mesh,
                                                           const std::vector<View>& views,
                                                           const Vec3& t0, const Vec3& s0,
                                                           const RefineConfig& cfg) {
    cfg.validate();
    if (views.empty()) throw InputError("coarse bin search needs at least one view");
    const int k = cfg.k;
    const int total = k * k * k;

    std::vector<std::pair<EulerBin, double>> out(total);
    parallel_for(total, [&](int b) {
        const int i = b / (k * k);
        const int j = (b / k) % k;
        const int l = b % k;
        const EulerBin bin = make_bin(i, j, l, k);
        const Rotation r = euler_to_rotation(bin.center.x(), bin.center.y(), bin.center.z());
        const double loss = multiview_loss(mesh, pose_at(r, t0, s0), views, cfg.soft, cfg.weights);
        out[b] = {bin, loss};
    });
    // enumeration order is lexicographic, so a stable sort keeps the
    // lexicographically smallest index first among ties
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    return out;
}

Rotation fine_bin_refine(const TriMesh& mesh, const std::vector<View>& views,
                         const std::vector<std::pair<EulerBin, double>>& bins, const Vec3& t0,
                         const Vec3& s0, const RefineConfig& cfg, long* evals) {
    cfg.validate();
    if (bins.empty()) throw InputError("fine bin refine needs at least one promoted bin");

    const int sub = cfg.fine_subdiv;
    const int per_round = sub * sub * sub;
    long used = 0;

    double best_loss = std::numeric_limits<double>::infinity();
    Vec3 best_euler = bins.front().first.center;

    std::vector<double> losses(per_round);
    for (const auto& [bin, coarse_loss] : bins) {
        Vec3 center = bin.center;
        double half = bin.half_width;
        for (int round = 0; round < cfg.fine_rounds; ++round) {
            const double sub_half = half / sub;
            parallel_for(per_round, [&](int b) {
                const int i = b / (sub * sub);
                const int j = (b / sub) % sub;
                const int l = b % sub;
                const Vec3 c = center - Vec3::Constant(half) +
                               2.0 * sub_half * (Vec3(i, j, l) + Vec3::Constant(0.5));
                const Rotation r = euler_to_rotation(c.x(), c.y(), c.z());
                losses[b] = multiview_loss(mesh, pose_at(r, t0, s0), views, cfg.soft, cfg.weights);
            });
            used += per_round;
            int argmin = 0;
            for (int b = 1; b < per_round; ++b)
                if (losses[b] < losses[argmin]) argmin = b;
            const int i = argmin / (sub * sub);
            const int j = (argmin / sub) % sub;
            const int l = argmin % sub;
            center = center - Vec3::Constant(half) +
                     2.0 * sub_half * (Vec3(i, j, l) + Vec3::Constant(0.5));
            half = sub_half;
            if (losses[argmin] < best_loss) {
                best_loss = losses[argmin];
                best_euler = center;
            }
        }
    }
    if (evals) *evals = used;
    return euler_to_rotation(best_euler.x(), best_euler.y(), best_euler.z());
}

std::pair<Pose, RefineReport> gradient_refine(const TriMesh& mesh,
                                              const std::vector<View>& views, const Pose& pose0,
                                              const RefineConfig& cfg) {
    cfg.validate();
    pose0.validate();
    if (views.empty()) throw InputError("gradient refine needs at least one view");

    RefineReport report;
    Pose current = pose0;

    // Adam state over [t(3), omega(3), log s(3)]
    Eigen::Matrix<double, 9, 1> m = Eigen::Matrix<double, 9, 1>::Zero();
    Eigen::Matrix<double, 9, 1> v = Eigen::Matrix<double, 9, 1>::Zero();

    auto evaluate = [&](const Pose& p, int iter) {
        LossAndGradient lg = multiview_loss_gradient(mesh, p, views, cfg.soft, cfg.weights);
        report.renders_used += static_cast<long>(views.size());
        if (!std::isfinite(lg.loss) || !lg.gradient.all_finite())
            throw NumericError("non-finite loss or gradient at iteration " + std::to_string(iter));
        return lg;
    };

    LossAndGradient lg = evaluate(current, 0);
    report.loss_trace.push_back(lg.loss);
    Pose best_pose = current;
    double best_loss = lg.loss;

    int stall = 0;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        Eigen::Matrix<double, 9, 1> g;
        g.segment<3>(0) = lg.gradient.d_translation;
        g.segment<3>(3) = lg.gradient.d_rotation;
        Vec3 g_log_s = current.scale.cwiseProduct(lg.gradient.d_scale);
        if (!cfg.optimize_scale)
            g_log_s.setZero();
        else if (cfg.isotropic_scale)
            g_log_s = Vec3::Constant(g_log_s.sum());  // common multiplier across axes
        g.segment<3>(6) = g_log_s;

        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.cwiseProduct(g);
        const double bc1 = 1.0 - std::pow(cfg.adam_beta1, iter);
        const double bc2 = 1.0 - std::pow(cfg.adam_beta2, iter);
        Eigen::Matrix<double, 9, 1> step;
        for (int i = 0; i < 9; ++i) {
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            step[i] = mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }

        current.translation -= cfg.lr_translation * step.segment<3>(0);
        current.rotation = current.rotation * so3_exp(-cfg.lr_rotation * step.segment<3>(3));
        current.scale = current.scale.cwiseProduct(
            (-cfg.lr_log_scale * step.segment<3>(6)).array().exp().matrix());

        lg = evaluate(current, iter);
        report.loss_trace.push_back(lg.loss);
        if (lg.loss < best_loss) {
            best_loss = lg.loss;
            best_pose = current;
        }

        const double prev = report.loss_trace[report.loss_trace.size() - 2];
        const double improvement = (prev - lg.loss) / std::max(std::abs(prev), 1e-300);
        if (improvement < cfg.rel_tol) {
            if (++stall >= cfg.patience) {
                report.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }

    report.final_pose = best_pose;
    report.final_loss = best_loss;
    return {best_pose, report};
}

std::pair<Pose, RefineReport> estimate_pose(const TriMesh& mesh, const std::vector<View>& views,
                                            const std::optional<Pose>& coarse,
                                            const RefineConfig& cfg) {
    cfg.validate();
    mesh.validate();
    if (views.empty()) throw InputError("estimate_pose needs at least one view");

    if (coarse) {
        coarse->validate();
        return gradient_refine(mesh, views, *coarse, cfg);
    }
    if (!cfg.t0 || !cfg.s0)
        throw InputError("estimate_pose needs an initial pose, or t0 and s0 in the config");

    auto coarse_list = coarse_bin_search(mesh, views, *cfg.t0, *cfg.s0, cfg);
    const long coarse_evals = static_cast<long>(coarse_list.size());

    std::vector<std::pair<EulerBin, double>> promoted(
        coarse_list.begin(),
        coarse_list.begin() + std::min<size_t>(cfg.n_best, coarse_list.size()));
    long fine_evals = 0;
    const Rotation rot = fine_bin_refine(mesh, views, promoted, *cfg.t0, *cfg.s0, cfg, &fine_evals);

    auto [pose, report] = gradient_refine(mesh, views, pose_at(rot, *cfg.t0, *cfg.s0), cfg);
    report.renders_used += (coarse_evals + fine_evals) * static_cast<long>(views.size());
    report.coarse_losses = std::move(coarse_list);
    return {pose, report};
}

}  // namespace mvpr
