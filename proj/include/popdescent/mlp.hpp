#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "popdescent/dataset.hpp"
#include "popdescent/rng.hpp"

namespace popdescent {

struct LossReport {
    double data_loss = 0.0;
    double reg_loss = 0.0;
    double total = 0.0;
};

// Fully connected ReLU network over flat parameters. `regularized_layers`
// names the weight matrices that contribute reg_rate * sum(w^2) to the loss;
// biases are never regularized.
struct MlpSpec {
    std::vector<std::size_t> layer_widths;
    std::vector<std::size_t> regularized_layers;

    static MlpSpec make(std::vector<std::size_t> widths,
                        std::vector<std::size_t> reg_layers = {0}) {
        MlpSpec spec;
        spec.layer_widths = std::move(widths);
        spec.regularized_layers = std::move(reg_layers);
        spec.validate();
        return spec;
    }

    static MlpSpec unregularized(std::vector<std::size_t> widths) {
        return make(std::move(widths), {});
    }

    std::size_t layer_count() const noexcept { return layer_widths.size() - 1; }

    void validate() const {
        if (layer_widths.size() < 2)
            throw std::invalid_argument("MLP needs at least input and output widths");
        for (std::size_t w : layer_widths)
            if (w == 0) throw std::invalid_argument("MLP layer widths must be positive");
        for (std::size_t l : regularized_layers)
            if (l >= layer_count())
                throw std::invalid_argument("regularized layer index " + std::to_string(l) +
                                            " out of range");
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
            n += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
        return n;
    }
};

// One forward+backward pass per call; no parameter state of its own, all
// weights live in the caller's flat theta vector.
class Mlp {
public:
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;
    using VectorMap = Eigen::Map<Eigen::VectorXd>;
    using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

    explicit Mlp(MlpSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        std::size_t offset = 0;
        for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
            weight_offsets_.push_back(offset);
            offset += in_width(l) * out_width(l);
            bias_offsets_.push_back(offset);
            offset += out_width(l);
        }
        param_count_ = offset;
    }

    const MlpSpec& spec() const noexcept { return spec_; }
    std::size_t parameter_count() const noexcept { return param_count_; }
    std::size_t class_count() const noexcept { return spec_.layer_widths.back(); }

    // Glorot-uniform weights, zero biases.
    std::vector<double> init_theta(RngStream& rng) const {
        std::vector<double> theta(param_count_, 0.0);
        for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
            const double bound =
                std::sqrt(6.0 / static_cast<double>(in_width(l) + out_width(l)));
            double* w = theta.data() + weight_offsets_[l];
            const std::size_t n = in_width(l) * out_width(l);
            for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
        }
        return theta;
    }

    // Mean sparse categorical cross-entropy plus the L2 term over regularized
    // layers. Gradient covers every parameter, computed in a single
    // forward+backward sweep.
    std::pair<LossReport, std::vector<double>> loss_and_grad(std::span<const double> theta,
                                                             const Batch& batch,
                                                             double reg_rate) const {
        check_inputs(theta, batch, reg_rate);
        const std::size_t n = batch.size();
        const std::size_t layers = spec_.layer_count();

        // Forward, keeping pre- and post-activation values per layer.
        std::vector<Matrix> activations;  // activations[l]: input to layer l
        activations.reserve(layers + 1);
        activations.emplace_back(ConstMatrixMap(batch.inputs.data(), static_cast<Eigen::Index>(n),
                                                static_cast<Eigen::Index>(batch.features)));
        for (std::size_t l = 0; l < layers; ++l) {
            Matrix z = activations[l] * weight(theta, l).transpose();
            z.rowwise() += bias(theta, l).transpose();
            if (!z.allFinite())
                throw std::runtime_error("non-finite activations in layer " + std::to_string(l));
            if (l + 1 < layers) z = z.cwiseMax(0.0);  // ReLU on hidden layers
            activations.push_back(std::move(z));
        }

        // Softmax cross-entropy via log-sum-exp, and its gradient in place.
        Matrix& logits = activations.back();
        double data_loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto row = logits.row(static_cast<Eigen::Index>(i));
            const double zmax = row.maxCoeff();
            const double lse = zmax + std::log((row.array() - zmax).exp().sum());
            const int target = batch.targets[i];
            data_loss += lse - row[target];
            row = (row.array() - lse).exp();  // softmax probabilities
            row[target] -= 1.0;
        }
        data_loss /= static_cast<double>(n);
        logits /= static_cast<double>(n);  // d(data_loss)/d(logits)

        LossReport report;
        report.data_loss = data_loss;
        report.reg_loss = regularization_loss(theta, reg_rate);
        report.total = report.data_loss + report.reg_loss;

        // Backward.
        std::vector<double> grad(param_count_, 0.0);
        Matrix delta = std::move(logits);
        for (std::size_t l = layers; l-- > 0;) {
            MatrixMap dw(grad.data() + weight_offsets_[l], static_cast<Eigen::Index>(out_width(l)),
                         static_cast<Eigen::Index>(in_width(l)));
            VectorMap db(grad.data() + bias_offsets_[l], static_cast<Eigen::Index>(out_width(l)));
            dw.noalias() = delta.transpose() * activations[l];
            db = delta.colwise().sum().transpose();
            if (is_regularized(l) && reg_rate != 0.0)
                dw += 2.0 * reg_rate * weight(theta, l);
            if (l > 0) {
                Matrix next = delta * weight(theta, l);
                // ReLU mask from the stored post-activation values.
                next.array() *= (activations[l].array() > 0.0).cast<double>();
                delta = std::move(next);
            }
        }
        return {report, std::move(grad)};
    }

    LossReport loss(std::span<const double> theta, const Batch& batch, double reg_rate) const {
        check_inputs(theta, batch, reg_rate);
        const Matrix logits = forward_logits(theta, batch);
        double data_loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            auto row = logits.row(static_cast<Eigen::Index>(i));
            const double zmax = row.maxCoeff();
            const double lse = zmax + std::log((row.array() - zmax).exp().sum());
            data_loss += lse - row[batch.targets[i]];
        }
        LossReport report;
        report.data_loss = data_loss / static_cast<double>(batch.size());
        report.reg_loss = regularization_loss(theta, reg_rate);
        report.total = report.data_loss + report.reg_loss;
        return report;
    }

    double accuracy(std::span<const double> theta, const Batch& batch) const {
        check_inputs(theta, batch, 0.0);
        const Matrix logits = forward_logits(theta, batch);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Eigen::Index argmax = 0;
            logits.row(static_cast<Eigen::Index>(i)).maxCoeff(&argmax);
            if (static_cast<int>(argmax) == batch.targets[i]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(batch.size());
    }

private:
    std::size_t in_width(std::size_t l) const noexcept { return spec_.layer_widths[l]; }
    std::size_t out_width(std::size_t l) const noexcept { return spec_.layer_widths[l + 1]; }

    bool is_regularized(std::size_t l) const {
        return std::find(spec_.regularized_layers.begin(), spec_.regularized_layers.end(), l) !=
               spec_.regularized_layers.end();
    }

    ConstMatrixMap weight(std::span<const double> theta, std::size_t l) const {
        return ConstMatrixMap(theta.data() + weight_offsets_[l],
                              static_cast<Eigen::Index>(out_width(l)),
                              static_cast<Eigen::Index>(in_width(l)));
    }

    ConstVectorMap bias(std::span<const double> theta, std::size_t l) const {
        return ConstVectorMap(theta.data() + bias_offsets_[l],
                              static_cast<Eigen::Index>(out_width(l)));
    }

    void check_inputs(std::span<const double> theta, const Batch& batch, double reg_rate) const {
        if (theta.size() != param_count_)
            throw std::invalid_argument("theta length " + std::to_string(theta.size()) +
                                        " does not match parameter count " +
                                        std::to_string(param_count_));
        if (batch.features != spec_.layer_widths.front())
            throw std::invalid_argument("batch feature width does not match the input layer");
        if (reg_rate < 0.0 || !std::isfinite(reg_rate))
            throw std::invalid_argument("regularization rate must be finite and nonnegative");
        batch.validate();
        for (int t : batch.targets)
            if (t < 0 || static_cast<std::size_t>(t) >= class_count())
                throw std::invalid_argument("target " + std::to_string(t) + " out of range for " +
                                            std::to_string(class_count()) + " classes");
    }

    double regularization_loss(std::span<const double> theta, double reg_rate) const {
        if (reg_rate == 0.0 || spec_.regularized_layers.empty()) return 0.0;
        double sq = 0.0;
        for (std::size_t l : spec_.regularized_layers) sq += weight(theta, l).squaredNorm();
        return reg_rate * sq;
    }

    Matrix forward_logits(std::span<const double> theta, const Batch& batch) const {
        Matrix h = ConstMatrixMap(batch.inputs.data(), static_cast<Eigen::Index>(batch.size()),
                                  static_cast<Eigen::Index>(batch.features));
        for (std::size_t l = 0; l < spec_.layer_count(); ++l) {
            Matrix z = h * weight(theta, l).transpose();
            z.rowwise() += bias(theta, l).transpose();
            if (!z.allFinite())
                throw std::runtime_error("non-finite activations in layer " + std::to_string(l));
            if (l + 1 < spec_.layer_count()) z = z.cwiseMax(0.0);
            h = std::move(z);
        }
        return h;
    }

    MlpSpec spec_;
    std::vector<std::size_t> weight_offsets_;
    std::vector<std::size_t> bias_offsets_;
    std::size_t param_count_ = 0;
};

}  // namespace popdescent
