#include <algorithm>
#include <cctype>

#include "haptix/eval.hpp"

namespace haptix::eval {

namespace {

class HmmAdapter final : public Classifier {
 public:
  explicit HmmAdapter(hmm::HmmClassifier clf) : clf_(std::move(clf)) {}
  ComplianceClass predict(const FeatureMatrix& x) const override { return hmm::classify_hmm(clf_, x).label; }
  nlohmann::json to_json() const override { return {{"kind", "hmm"}, {"models", hmm::to_json(clf_)}}; }

 private:
  hmm::HmmClassifier clf_;
};

class SvmAdapter final : public Classifier {
 public:
  explicit SvmAdapter(svm::SvmModel m) : model_(std::move(m)) {}
  ComplianceClass predict(const FeatureMatrix& x) const override {
    return svm::predict_svm(model_, svm::flatten(x)).label;
  }
  nlohmann::json to_json() const override { return {{"kind", "svm"}, {"model", svm::to_json(model_)}}; }

 private:
  svm::SvmModel model_;
};

class TcnAdapter final : public Classifier {
 public:
  explicit TcnAdapter(nn::TcnModel m) : model_(std::move(m)) {}
  ComplianceClass predict(const FeatureMatrix& x) const override { return class_at(nn::predict(model_.forward(x))); }
  nlohmann::json to_json() const override { return {{"kind", "tcn"}, {"model", nn::to_json(model_)}}; }

 private:
  nn::TcnModel model_;
};

class LstmAdapter final : public Classifier {
 public:
  explicit LstmAdapter(nn::LstmModel m) : model_(std::move(m)) {}
  ComplianceClass predict(const FeatureMatrix& x) const override { return class_at(nn::predict(model_.forward(x))); }
  nlohmann::json to_json() const override { return {{"kind", "lstm"}, {"model", nn::to_json(model_)}}; }

 private:
  nn::LstmModel model_;
};

void require_nonempty(std::span<const FeatureMatrix> train) {
  if (train.empty()) throw EmptyTrainingSet();
}

}  // namespace

std::string_view to_string(ClassifierKind k) noexcept {
  switch (k) {
    case ClassifierKind::Hmm: return "hmm";
    case ClassifierKind::Svm: return "svm";
    case ClassifierKind::Tcn: return "tcn";
    case ClassifierKind::Lstm: return "lstm";
  }
  return "unknown";
}

ClassifierKind parse_classifier(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "hmm") return ClassifierKind::Hmm;
  if (n == "svm") return ClassifierKind::Svm;
  if (n == "tcn") return ClassifierKind::Tcn;
  if (n == "lstm") return ClassifierKind::Lstm;
  throw std::invalid_argument("unknown classifier '" + std::string(name) + "' (expected hmm, svm, tcn or lstm)");
}

nlohmann::json ClassifierSpec::to_json() const {
  nlohmann::json j{{"kind", id()}};
  switch (kind) {
    case ClassifierKind::Hmm:
      j["states"] = hmm.states;
      j["max_iter"] = hmm.max_iter;
      j["tol"] = hmm.tol;
      j["reestimate_initial"] = hmm.reestimate_initial;
      break;
    case ClassifierKind::Svm:
      j["C"] = svm.C;
      j["epochs"] = svm.epochs;
      break;
    case ClassifierKind::Tcn:
    case ClassifierKind::Lstm:
      j["learning_rate"] = nn.learning_rate;
      j["epochs"] = nn.epochs;
      j["batch_size"] = nn.batch_size;
      j["optimizer"] = nn.optimizer == nn::Optimizer::Adam ? "adam" : "sgd";
      if (kind == ClassifierKind::Tcn) {
        j["widths"] = tcn_widths;
        j["kernel"] = tcn_kernel;
      } else {
        j["hidden"] = lstm_hidden;
        j["layers"] = lstm_layers;
        j["per_step_loss"] = lstm_per_step_loss;
      }
      break;
  }
  return j;
}

nn::TrainConfig default_train_config(ClassifierKind) { return nn::TrainConfig{}; }

ClassifierSpec ClassifierSpec::defaults(ClassifierKind kind) {
  ClassifierSpec s;
  s.kind = kind;
  s.nn = default_train_config(kind);
  return s;
}

Trainer make_trainer(const ClassifierSpec& spec) {
  switch (spec.kind) {
    case ClassifierKind::Hmm:
      return [spec](std::span<const FeatureMatrix> train, std::uint64_t) -> std::unique_ptr<Classifier> {
        require_nonempty(train);
        return std::make_unique<HmmAdapter>(hmm::train_hmm_classifier(train, spec.hmm));
      };
    case ClassifierKind::Svm:
      return [spec](std::span<const FeatureMatrix> train, std::uint64_t seed) -> std::unique_ptr<Classifier> {
        require_nonempty(train);
        std::vector<std::vector<double>> X;
        std::vector<ComplianceClass> y;
        X.reserve(train.size());
        for (const auto& fm : train) {
          if (!fm.label) throw DataError("training matrix '" + fm.trial_id + "' has no label");
          X.push_back(svm::flatten(fm));
          y.push_back(*fm.label);
        }
        svm::SvmOptions opts = spec.svm;
        opts.seed += seed;
        auto model = svm::train_svm(X, y, opts).model;
        model.channel_names = train.front().channel_names;
        return std::make_unique<SvmAdapter>(std::move(model));
      };
    case ClassifierKind::Tcn:
      return [spec](std::span<const FeatureMatrix> train, std::uint64_t seed) -> std::unique_ptr<Classifier> {
        require_nonempty(train);
        nn::TcnShape shape;
        shape.input_channels = train.front().cols;
        shape.seq_len = train.front().rows;
        shape.widths = spec.tcn_widths;
        shape.kernel = spec.tcn_kernel;
        nn::TrainConfig cfg = spec.nn;
        cfg.seed += seed;
        auto res = nn::train(nn::TcnModel::random(shape, cfg.seed), train, cfg);
        return std::make_unique<TcnAdapter>(std::move(res.model));
      };
    case ClassifierKind::Lstm:
      return [spec](std::span<const FeatureMatrix> train, std::uint64_t seed) -> std::unique_ptr<Classifier> {
        require_nonempty(train);
        nn::LstmShape shape;
        shape.input_channels = train.front().cols;
        shape.hidden = spec.lstm_hidden;
        shape.layers = spec.lstm_layers;
        shape.per_step_loss = spec.lstm_per_step_loss;
        nn::TrainConfig cfg = spec.nn;
        cfg.seed += seed;
        auto res = nn::train(nn::LstmModel::random(shape, cfg.seed), train, cfg);
        return std::make_unique<LstmAdapter>(std::move(res.model));
      };
  }
  throw std::invalid_argument("unknown classifier kind");
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "");
  if (kind == "hmm") return std::make_unique<HmmAdapter>(hmm::classifier_from_json(j.at("models")));
  if (kind == "svm") return std::make_unique<SvmAdapter>(svm::model_from_json(j.at("model")));
  if (kind == "tcn") return std::make_unique<TcnAdapter>(nn::tcn_from_json(j.at("model")));
  if (kind == "lstm") return std::make_unique<LstmAdapter>(nn::lstm_from_json(j.at("model")));
  throw DataError("unknown classifier kind '" + kind + "' in model JSON");
}

}  // namespace haptix::eval
