#include "chaoslab/drift.hpp"

#include <cmath>
#include <memory>

namespace chaoslab {

Vec DriftModel::operator()(const MeasureView& mu, const Vec& x) const
{
    Vec out(x.size());
    eval(mu, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
         std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

void DriftModel::require(bool need_flat1, bool need_flat2, bool need_wgrad, bool need_xgrad) const
{
    auto missing = [this](const char* slot) {
        throw CapabilityError("drift model '" + name + "' has no " + slot + " slot");
    };
    if (!eval) missing("eval");
    if (need_flat1 && !flat1) missing("flat1");
    if (need_flat2 && !flat2) missing("flat2");
    if (need_wgrad && !wgrad) missing("wgrad");
    if (need_xgrad && !xgrad) missing("xgrad");
}

namespace {

double sech2(double v)
{
    const double c = std::cosh(v);
    return 1.0 / (c * c);
}

double op_norm(const Mat& m)
{
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

// Owned copy of a measure, captured by bound derivative functors.
struct Cloud {
    std::vector<double> coords;
    std::vector<double> weights;
    int dim;

    explicit Cloud(const MeasureView& mu)
        : coords(mu.coords.begin(), mu.coords.end()), weights(mu.size()), dim(mu.dim)
    {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = mu.weight(i);
    }
    std::size_t size() const { return weights.size(); }
    ConstVecMap point(std::size_t i) const
    {
        return ConstVecMap(coords.data() + i * static_cast<std::size_t>(dim), dim);
    }
};

// V(mu, x) = A x + F(mean(mu)) with F, dF, d2F from `form`.
DriftModel mean_affine_model(std::string name, MeanAffineForm form)
{
    DriftModel v;
    v.name = std::move(name);
    v.dim = static_cast<int>(form.A.rows());
    v.structure = Structure::mean_affine;
    const auto f = std::make_shared<const MeanAffineForm>(form);
    v.eval = [f](const MeasureView& mu, std::span<const double> xs, std::span<double> out) {
        const int d = mu.dim;
        const Vec shift = f->F(mean(mu));
        const std::size_t count = xs.size() / static_cast<std::size_t>(d);
        if (d == 1) {
            const double a = f->A(0, 0), s = shift[0];
            for (std::size_t i = 0; i < count; ++i) out[i] = a * xs[i] + s;
            return;
        }
        for (std::size_t i = 0; i < count; ++i) {
            VecMap o(out.data() + i * d, d);
            o.noalias() = f->A * ConstVecMap(xs.data() + i * d, d);
            o += shift;
        }
    };
    v.flat1 = [f](const MeasureView& mu) -> Flat1Fn {
        const Mat jac = f->dF(mean(mu));
        return [jac](const Vec&, const Vec& y) -> Vec { return jac * y; };
    };
    v.flat2 = [f](const MeasureView& mu) -> Flat2Fn {
        const auto hess = f->d2F(mean(mu));
        return [hess](const Vec&, const Vec& y, const Vec& z) -> Vec {
            Vec out(static_cast<Eigen::Index>(hess.size()));
            for (std::size_t i = 0; i < hess.size(); ++i)
                out[static_cast<Eigen::Index>(i)] = y.dot(hess[i] * z);
            return out;
        };
    };
    v.wgrad = [f](const MeasureView& mu) -> WgradFn {
        const Mat jac = f->dF(mean(mu));
        return [jac](const Vec&, const Vec&) -> Mat { return jac; };
    };
    v.xgrad = [f](const MeasureView&) -> XgradFn {
        const Mat a = f->A;
        return [a](const Vec&) -> Mat { return a; };
    };
    v.mean_affine = form;
    return v;
}

DriftModel build(const LinearMeanField& s)
{
    const int d = static_cast<int>(s.A.rows());
    if (s.A.cols() != d || s.B.rows() != d || s.B.cols() != d || s.b0.size() != d)
        throw DomainError("LinearMeanField: inconsistent shapes");
    MeanAffineForm form;
    form.A = s.A;
    const Mat B = s.B;
    const Vec b0 = s.b0;
    form.F = [B, b0](const Vec& m) -> Vec { return b0 + B * m; };
    form.dF = [B](const Vec&) -> Mat { return B; };
    form.d2F = [d](const Vec&) { return std::vector<Mat>(d, Mat::Zero(d, d)); };
    auto v = mean_affine_model("linear_mean_field", form);
    v.wgrad_sup = op_norm(B);
    v.lipschitz_bound = op_norm(s.A) + op_norm(B);
    return v;
}

DriftModel build(const MeanNonlinearity& s)
{
    if (!s.g.value || !s.g.jacobian || !s.g.hessians)
        throw DomainError("MeanNonlinearity: g must supply value, jacobian and hessians");
    MeanAffineForm form;
    form.A = s.A;
    form.F = s.g.value;
    form.dF = s.g.jacobian;
    form.d2F = s.g.hessians;
    auto v = mean_affine_model("mean_nonlinearity", form);
    v.wgrad_sup = s.g.jacobian_sup;
    v.lipschitz_bound = op_norm(s.A) + s.g.jacobian_sup;
    return v;
}

DriftModel build(const PairwiseKernel& s)
{
    DriftModel v;
    v.name = "pairwise_kernel";
    v.dim = s.dim;
    v.structure = Structure::pairwise;
    const auto phi = std::make_shared<const PairInteraction>(s.phi);
    v.eval = [phi](const MeasureView& mu, std::span<const double> xs, std::span<double> out) {
        const int d = mu.dim;
        const std::size_t count = xs.size() / static_cast<std::size_t>(d);
        Vec x(d), y(d);
        for (std::size_t i = 0; i < count; ++i) {
            x = ConstVecMap(xs.data() + i * d, d);
            Vec acc = Vec::Zero(d);
            for (std::size_t j = 0; j < mu.size(); ++j) {
                y = mu.point(j);
                acc += mu.weight(j) * phi->value(x, y);
            }
            VecMap(out.data() + i * d, d) = acc;
        }
    };
    v.flat1 = [phi](const MeasureView&) -> Flat1Fn {
        return [phi](const Vec& x, const Vec& y) -> Vec {
            return phi->value(x, y) - phi->value(x, Vec::Zero(y.size()));
        };
    };
    v.flat2 = [](const MeasureView&) -> Flat2Fn {
        return [](const Vec& x, const Vec&, const Vec&) -> Vec { return Vec::Zero(x.size()); };
    };
    v.wgrad = [phi](const MeasureView&) -> WgradFn {
        return [phi](const Vec& x, const Vec& y) -> Mat { return phi->dy(x, y); };
    };
    v.xgrad = [phi](const MeasureView& mu) -> XgradFn {
        auto cloud = std::make_shared<const Cloud>(mu);
        return [phi, cloud](const Vec& x) -> Mat {
            Mat acc = Mat::Zero(x.size(), x.size());
            for (std::size_t j = 0; j < cloud->size(); ++j)
                acc += cloud->weights[j] * phi->dx(x, cloud->point(j));
            return acc;
        };
    };
    v.wgrad_sup = s.phi.dy_sup;
    return v;
}

DriftModel build(const KernelComposition& s)
{
    DriftModel v;
    v.name = "kernel_composition";
    v.dim = s.dim;
    v.structure = Structure::generic;
    const auto G = std::make_shared<const OuterMap>(s.G);
    const auto h = std::make_shared<const InnerKernel>(s.h);
    // u(x) = int h(x, y) dmu(y)
    auto inner = [h](const auto& cloud, const Vec& x) {
        Vec u = Vec::Zero(h->out_dim);
        for (std::size_t j = 0; j < cloud.size(); ++j)
            u += cloud.weight(j) * h->value(x, cloud.point(j));
        return u;
    };
    v.eval = [G, inner](const MeasureView& mu, std::span<const double> xs, std::span<double> out) {
        const int d = mu.dim;
        const std::size_t count = xs.size() / static_cast<std::size_t>(d);
        for (std::size_t i = 0; i < count; ++i) {
            const Vec x = ConstVecMap(xs.data() + i * d, d);
            VecMap(out.data() + i * d, d) = G->value(x, inner(mu, x));
        }
    };
    struct BoundCloud : Cloud {
        using Cloud::Cloud;
        double weight(std::size_t j) const { return weights[j]; }
    };
    v.flat1 = [G, h, inner](const MeasureView& mu) -> Flat1Fn {
        auto cloud = std::make_shared<const BoundCloud>(mu);
        return [G, h, inner, cloud](const Vec& x, const Vec& y) -> Vec {
            const Vec u = inner(*cloud, x);
            return G->du(x, u) * (h->value(x, y) - h->value(x, Vec::Zero(y.size())));
        };
    };
    v.flat2 = [G, h, inner](const MeasureView& mu) -> Flat2Fn {
        auto cloud = std::make_shared<const BoundCloud>(mu);
        return [G, h, inner, cloud](const Vec& x, const Vec& y, const Vec& z) -> Vec {
            const Vec u = inner(*cloud, x);
            const Vec h0 = h->value(x, Vec::Zero(y.size()));
            const Vec hy = h->value(x, y) - h0, hz = h->value(x, z) - h0;
            const auto hess = G->duu(x, u);
            Vec out(x.size());
            for (Eigen::Index i = 0; i < x.size(); ++i)
                out[i] = hy.dot(hess[static_cast<std::size_t>(i)] * hz);
            return out;
        };
    };
    v.wgrad = [G, h, inner](const MeasureView& mu) -> WgradFn {
        auto cloud = std::make_shared<const BoundCloud>(mu);
        return [G, h, inner, cloud](const Vec& x, const Vec& y) -> Mat {
            return G->du(x, inner(*cloud, x)) * h->dy(x, y);
        };
    };
    v.xgrad = [G, h, inner](const MeasureView& mu) -> XgradFn {
        auto cloud = std::make_shared<const BoundCloud>(mu);
        return [G, h, inner, cloud](const Vec& x) -> Mat {
            const Vec u = inner(*cloud, x);
            Mat dh = Mat::Zero(h->out_dim, x.size());
            for (std::size_t j = 0; j < cloud->size(); ++j)
                dh += cloud->weights[j] * h->dx(x, cloud->point(j));
            return G->dx(x, u) + G->du(x, u) * dh;
        };
    };
    v.wgrad_sup = s.G.du_sup * s.h.dy_sup;
    return v;
}

DriftModel build(const LangevinGradient& s)
{
    DriftModel v;
    v.name = "langevin_gradient";
    v.dim = s.dim;
    v.structure = s.g ? Structure::generic : Structure::pairwise;
    const auto U = std::make_shared<const Potential>(s.U);
    const auto W = std::make_shared<const Potential>(s.W);
    const auto g = s.g ? std::make_shared<const Potential>(*s.g) : nullptr;
    v.eval = [U, W, g](const MeasureView& mu, std::span<const double> xs, std::span<double> out) {
        const int d = mu.dim;
        const std::size_t count = xs.size() / static_cast<std::size_t>(d);
        const Vec shift = g ? Vec(g->grad(mean(mu))) : Vec(Vec::Zero(d));
        for (std::size_t i = 0; i < count; ++i) {
            const Vec x = ConstVecMap(xs.data() + i * d, d);
            Vec acc = -U->grad(x) - shift;
            for (std::size_t j = 0; j < mu.size(); ++j)
                acc -= mu.weight(j) * W->grad(x - mu.point(j));
            VecMap(out.data() + i * d, d) = acc;
        }
    };
    v.flat1 = [W, g](const MeasureView& mu) -> Flat1Fn {
        const int d = mu.dim;
        const Mat curv = g ? Mat(g->hessian(mean(mu))) : Mat(Mat::Zero(d, d));
        return [W, curv](const Vec& x, const Vec& y) -> Vec {
            return W->grad(x) - W->grad(x - y) - curv * y;
        };
    };
    if (!g || g->quadratic) {
        v.flat2 = [](const MeasureView&) -> Flat2Fn {
            return [](const Vec& x, const Vec&, const Vec&) -> Vec { return Vec::Zero(x.size()); };
        };
    }
    v.wgrad = [W, g](const MeasureView& mu) -> WgradFn {
        const int d = mu.dim;
        const Mat curv = g ? Mat(g->hessian(mean(mu))) : Mat(Mat::Zero(d, d));
        return [W, curv](const Vec& x, const Vec& y) -> Mat { return W->hessian(x - y) - curv; };
    };
    v.xgrad = [U, W](const MeasureView& mu) -> XgradFn {
        auto cloud = std::make_shared<const Cloud>(mu);
        return [U, W, cloud](const Vec& x) -> Mat {
            Mat acc = -U->hessian(x);
            for (std::size_t j = 0; j < cloud->size(); ++j)
                acc -= cloud->weights[j] * W->hessian(x - cloud->point(j));
            return acc;
        };
    };
    v.wgrad_sup = s.W.hessian_sup + (s.g ? s.g->hessian_sup : 0.0);
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------

SmoothMap SmoothMap::scaled_tanh(double c)
{
    SmoothMap g;
    g.value = [c](const Vec& m) -> Vec { return c * m.array().tanh().matrix(); };
    g.jacobian = [c](const Vec& m) -> Mat {
        Vec diag(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) diag[i] = c * sech2(m[i]);
        return diag.asDiagonal();
    };
    g.hessians = [c](const Vec& m) {
        std::vector<Mat> out(static_cast<std::size_t>(m.size()), Mat::Zero(m.size(), m.size()));
        for (Eigen::Index i = 0; i < m.size(); ++i)
            out[static_cast<std::size_t>(i)](i, i) = -2.0 * c * std::tanh(m[i]) * sech2(m[i]);
        return out;
    };
    g.jacobian_sup = std::abs(c);
    return g;
}

SmoothMap SmoothMap::scaled_sin(double c)
{
    SmoothMap g;
    g.value = [c](const Vec& m) -> Vec { return c * m.array().sin().matrix(); };
    g.jacobian = [c](const Vec& m) -> Mat { return (c * m.array().cos()).matrix().asDiagonal(); };
    g.hessians = [c](const Vec& m) {
        std::vector<Mat> out(static_cast<std::size_t>(m.size()), Mat::Zero(m.size(), m.size()));
        for (Eigen::Index i = 0; i < m.size(); ++i)
            out[static_cast<std::size_t>(i)](i, i) = -c * std::sin(m[i]);
        return out;
    };
    g.jacobian_sup = std::abs(c);
    return g;
}

SmoothMap SmoothMap::linear(const Mat& B)
{
    SmoothMap g;
    g.value = [B](const Vec& m) -> Vec { return B * m; };
    g.jacobian = [B](const Vec&) -> Mat { return B; };
    g.hessians = [B](const Vec& m) {
        return std::vector<Mat>(static_cast<std::size_t>(B.rows()), Mat::Zero(m.size(), m.size()));
    };
    g.jacobian_sup = op_norm(B);
    return g;
}

SmoothMap SmoothMap::zero()
{
    SmoothMap g;
    g.value = [](const Vec& m) -> Vec { return Vec::Zero(m.size()); };
    g.jacobian = [](const Vec& m) -> Mat { return Mat::Zero(m.size(), m.size()); };
    g.hessians = [](const Vec& m) {
        return std::vector<Mat>(static_cast<std::size_t>(m.size()), Mat::Zero(m.size(), m.size()));
    };
    g.jacobian_sup = 0.0;
    return g;
}

PairInteraction PairInteraction::confined_sine(double kappa, double scale)
{
    PairInteraction p;
    p.value = [kappa, scale](const Vec& x, const Vec& y) -> Vec {
        return -kappa * x + scale * (x - y).array().sin().matrix();
    };
    p.dx = [kappa, scale](const Vec& x, const Vec& y) -> Mat {
        Mat m = (scale * (x - y).array().cos()).matrix().asDiagonal();
        m.diagonal().array() -= kappa;
        return m;
    };
    p.dy = [scale](const Vec& x, const Vec& y) -> Mat {
        return (-scale * (x - y).array().cos()).matrix().asDiagonal();
    };
    p.dy_sup = std::abs(scale);
    return p;
}

PairInteraction PairInteraction::linear(const Mat& A, const Mat& B)
{
    PairInteraction p;
    p.value = [A, B](const Vec& x, const Vec& y) -> Vec { return A * x + B * y; };
    p.dx = [A](const Vec&, const Vec&) -> Mat { return A; };
    p.dy = [B](const Vec&, const Vec&) -> Mat { return B; };
    p.dy_sup = op_norm(B);
    return p;
}

InnerKernel InnerKernel::gaussian_bump(double width)
{
    InnerKernel h;
    h.out_dim = 1;
    const double inv_w2 = 1.0 / (width * width);
    h.value = [inv_w2](const Vec& x, const Vec& y) -> Vec {
        return Vec::Constant(1, std::exp(-0.5 * inv_w2 * (x - y).squaredNorm()));
    };
    h.dx = [inv_w2](const Vec& x, const Vec& y) -> Mat {
        const double k = std::exp(-0.5 * inv_w2 * (x - y).squaredNorm());
        return (-k * inv_w2 * (x - y)).transpose();
    };
    h.dy = [inv_w2](const Vec& x, const Vec& y) -> Mat {
        const double k = std::exp(-0.5 * inv_w2 * (x - y).squaredNorm());
        return (k * inv_w2 * (x - y)).transpose();
    };
    h.dy_sup = std::exp(-0.5) / width;
    return h;
}

OuterMap OuterMap::confined_tanh(double kappa, double scale)
{
    OuterMap G;
    G.value = [kappa, scale](const Vec& x, const Vec& u) -> Vec {
        return -kappa * x + Vec::Constant(x.size(), scale * std::tanh(u[0]));
    };
    G.dx = [kappa](const Vec& x, const Vec&) -> Mat {
        return -kappa * Mat::Identity(x.size(), x.size());
    };
    G.du = [scale](const Vec& x, const Vec& u) -> Mat {
        Mat m = Mat::Zero(x.size(), u.size());
        m.col(0).setConstant(scale * sech2(u[0]));
        return m;
    };
    G.duu = [scale](const Vec& x, const Vec& u) {
        Mat h = Mat::Zero(u.size(), u.size());
        h(0, 0) = -2.0 * scale * std::tanh(u[0]) * sech2(u[0]);
        return std::vector<Mat>(static_cast<std::size_t>(x.size()), h);
    };
    G.du_sup = std::abs(scale);  // per component; the column norm adds sqrt(d)
    return G;
}

Potential Potential::quadratic_well(double curvature)
{
    Potential p;
    p.grad = [curvature](const Vec& x) -> Vec { return curvature * x; };
    p.hessian = [curvature](const Vec& x) -> Mat {
        return curvature * Mat::Identity(x.size(), x.size());
    };
    p.hessian_sup = std::abs(curvature);
    p.quadratic = true;
    return p;
}

Potential Potential::logcosh(double scale)
{
    Potential p;
    p.grad = [scale](const Vec& x) -> Vec { return scale * x.array().tanh().matrix(); };
    p.hessian = [scale](const Vec& x) -> Mat {
        Vec diag(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) diag[i] = scale * sech2(x[i]);
        return diag.asDiagonal();
    };
    p.hessian_sup = std::abs(scale);
    return p;
}

DriftModel make_family(const ModelFamily& spec)
{
    return std::visit([](const auto& s) { return build(s); }, spec);
}

DriftModel linear_drift(double a, double b, double b0)
{
    return make_family(LinearMeanField{Mat::Constant(1, 1, a), Mat::Constant(1, 1, b),
                                       Vec::Constant(1, b0)});
}

}  // namespace chaoslab
