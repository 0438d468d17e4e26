#include "psgdct/train.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "psgdct/error.h"
#include "psgdct/eval.h"

namespace psgdct {
namespace {

struct Prepared {
  std::vector<Tensor> inputs;
  std::vector<std::vector<double>> statics;
  std::vector<int> labels;
};

Prepared prepare(const Model& model, const Standardizer& scaler, const std::vector<Sample>& data,
                 std::span<const std::size_t> indices) {
  Prepared p;
  for (std::size_t i : indices) {
    p.inputs.push_back(model.prepare_input(data[i].image));
    p.statics.push_back(scaler.apply(data[i].statics));
    p.labels.push_back(data[i].label);
  }
  return p;
}

class Adam {
 public:
  Adam(std::size_t n, const TrainHyper& h) : h_(h), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(h_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(h_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = h_.beta1 * m_[i] + (1.0 - h_.beta1) * grads[i];
      v_[i] = h_.beta2 * v_[i] + (1.0 - h_.beta2) * grads[i] * grads[i];
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] -= h_.learning_rate * mhat / (std::sqrt(vhat) + h_.epsilon);
    }
  }

 private:
  TrainHyper h_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

// Higher is better.
double validation_score(const Model& model, const Prepared& val, std::span<const double> class_weight) {
  std::vector<double> scores;
  bool has_pos = false, has_neg = false;
  double loss = 0.0;
  for (std::size_t i = 0; i < val.inputs.size(); ++i) {
    const double z = model.logit(val.inputs[i], val.statics[i]);
    scores.push_back(sigmoid(z));
    loss += weighted_bce(z, val.labels[i], class_weight[val.labels[i]]).loss;
    (val.labels[i] == 1 ? has_pos : has_neg) = true;
  }
  if (has_pos && has_neg) return roc_auc(scores, val.labels);
  return -loss / static_cast<double>(val.inputs.size());
}

}  // namespace

void TrainHyper::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidParameter("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw InvalidParameter("Adam betas must be in [0, 1)");
  }
  if (batch_size == 0) throw InvalidParameter("batch size must be >= 1");
  if (max_epochs == 0) throw InvalidParameter("max_epochs must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw InvalidParameter("validation fraction must be in [0, 1)");
  }
}

TrainResult train(const std::vector<Sample>& data, const ModelConfig& cfg, const TrainHyper& hyper) {
  hyper.validate();
  if (data.empty()) throw InvalidInput("training set is empty");
  for (const Sample& s : data) {
    if (s.label != 0 && s.label != 1) throw InvalidInput("labels must be 0 or 1 (record " + s.id + ")");
  }

  Model model(resolve_input_shape(cfg, data.front().image));
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t n_val = 0;
  if (hyper.validation_fraction > 0.0) {
    std::shuffle(order.begin(), order.end(), rng);
    n_val = static_cast<std::size_t>(std::lround(hyper.validation_fraction * static_cast<double>(data.size())));
    if (n_val >= data.size()) n_val = 0;
  }
  const std::span<const std::size_t> fit_idx(order.data(), order.size() - n_val);
  const std::span<const std::size_t> val_idx(order.data() + fit_idx.size(), n_val);

  std::vector<std::vector<double>> all_statics;
  for (const Sample& s : data) all_statics.push_back(s.statics);
  const Standardizer scaler = Standardizer::fit(all_statics);

  const Prepared fit = prepare(model, scaler, data, fit_idx);
  const Prepared val = prepare(model, scaler, data, val_idx);

  double class_weight[2] = {1.0, 1.0};
  if (hyper.class_weighting) {
    const auto pos = static_cast<double>(std::count(fit.labels.begin(), fit.labels.end(), 1));
    const double total = static_cast<double>(fit.labels.size());
    const double neg = total - pos;
    if (pos > 0.0 && neg > 0.0) {
      class_weight[0] = total / (2.0 * neg);
      class_weight[1] = total / (2.0 * pos);
    }
  }

  TrainResult result;
  Adam adam(model.layout().total, hyper);
  std::vector<double> grads(model.layout().total);
  std::vector<double> best_params(model.parameters().begin(), model.parameters().end());
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t since_best = 0;
  std::size_t step = 0;
  std::size_t epochs_run = 0;
  Trace trace;

  std::vector<std::size_t> batch_order(fit.inputs.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);

  for (std::size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    std::shuffle(batch_order.begin(), batch_order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < batch_order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(batch_order.size(), start + hyper.batch_size);
      const double inv_b = 1.0 / static_cast<double>(end - start);
      std::fill(grads.begin(), grads.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t i = batch_order[j];
        double z = 0.0;
        try {
          z = model.logit(fit.inputs[i], fit.statics[i], &trace);
        } catch (const NumericError& e) {
          throw TrainingFailure(static_cast<long>(step), e.what());
        }
        const LossValue lv = weighted_bce(z, fit.labels[i], class_weight[fit.labels[i]]);
        batch_loss += lv.loss * inv_b;
        model.backward(trace, lv.grad_logit * inv_b, grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingFailure(static_cast<long>(step), "loss is not finite");
      }
      adam.step(model.parameters(), grads);
      model.clamp_thresholds();
      result.step_losses.push_back(batch_loss);
      epoch_loss += batch_loss * static_cast<double>(end - start);
      ++step;
    }
    epoch_loss /= static_cast<double>(batch_order.size());
    result.epoch_losses.push_back(epoch_loss);
    epochs_run = epoch;

    if (n_val == 0) continue;
    const double score = validation_score(model, val, class_weight);
    if (score > best_score) {
      best_score = score;
      best_epoch = epoch;
      since_best = 0;
      std::copy(model.parameters().begin(), model.parameters().end(), best_params.begin());
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }

  ModelCheckpoint& ck = result.checkpoint;
  ck.config = model.config();
  if (n_val > 0) {
    ck.parameters = best_params;
  } else {
    ck.parameters.assign(model.parameters().begin(), model.parameters().end());
    best_epoch = epochs_run;
    best_score = 0.0;
  }
  ck.statics = scaler;
  ck.meta.epochs = epochs_run;
  ck.meta.steps = step;
  ck.meta.best_epoch = best_epoch;
  ck.meta.best_validation = best_score;
  ck.meta.final_loss = result.epoch_losses.back();
  ck.meta.seed = cfg.seed;
  return result;
}

std::vector<double> predict(const ModelCheckpoint& ckpt, const std::vector<Sample>& data) {
  const Model model = ckpt.model();
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const Sample& s : data) {
    scores.push_back(model.predict(model.prepare_input(s.image), ckpt.statics.apply(s.statics)));
  }
  return scores;
}

}  // namespace psgdct
