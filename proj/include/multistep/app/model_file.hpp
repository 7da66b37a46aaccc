#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <variant>

#include "multistep/app/config.hpp"
#include "multistep/data/normalizer.hpp"
#include "multistep/eval/metrics.hpp"
#include "multistep/nn/serialize.hpp"
#include "multistep/strategies/direct.hpp"
#include "multistep/strategies/multi_output.hpp"
#include "multistep/strategies/recursive.hpp"

namespace multistep::app {

inline constexpr const char* kModelKind = "multistep-model";

/// A trained model of any strategy together with what is needed to score it.
struct TrainedModel {
    std::string strategy;
    Index p = 0;
    Index q = 0;
    std::optional<Normalizer> normalizer;
    std::variant<RecursiveModel, DirectModelSet, MultiOutputModel> model;

    /// H = q predictions for each row of `histories` ([n x p]).
    Eigen::MatrixXd predict(const Eigen::MatrixXd& histories) const {
        if (histories.cols() != p)
            throw ShapeError("history length " + std::to_string(histories.cols()) + " does not match model p = " + std::to_string(p));
        if (const auto* r = std::get_if<RecursiveModel>(&model)) return rollout_batch(*r, histories, q);
        if (const auto* d = std::get_if<DirectModelSet>(&model)) return predict_direct_batch(*d, histories);
        const auto& m = std::get<MultiOutputModel>(model);
        return predict_batch(m.net, histories.transpose()).transpose();
    }

    HorizonPredictor predictor() const {
        return [this](std::span<const double> h) {
            Eigen::MatrixXd row(1, static_cast<Index>(h.size()));
            for (Index k = 0; k < row.cols(); ++k) row(0, k) = h[static_cast<std::size_t>(k)];
            return Eigen::VectorXd(predict(row).row(0).transpose());
        };
    }
};

inline ModelMetadata base_metadata(const TrainedModel& m) {
    ModelMetadata meta;
    meta.strategy_tag = m.strategy;
    if (m.normalizer) meta.normalization = NormalizationInfo{m.normalizer->min, m.normalizer->max};
    meta.p = m.p;
    meta.q = m.q;
    return meta;
}

/// Envelope {kind, format_version, strategy_tag, p, q, normalization, model, config}.
inline nlohmann::json to_json(const TrainedModel& m, const nlohmann::json& config = nullptr) {
    nlohmann::json payload;
    ModelMetadata meta = base_metadata(m);
    if (const auto* r = std::get_if<RecursiveModel>(&m.model)) {
        meta.time_step_augmented = r->time_step_augmented;
        if (r->time_step_augmented) meta.max_step = r->max_step;
        payload = to_json(r->net, meta);
    } else if (const auto* d = std::get_if<DirectModelSet>(&m.model)) {
        payload = nlohmann::json::array();
        for (std::size_t h = 0; h < d->models.size(); ++h) {
            ModelMetadata mh = meta;
            mh.h = static_cast<Index>(h + 1);
            mh.hybrid = d->hybrid;
            payload.push_back(to_json(d->models[h], mh));
        }
    } else {
        payload = to_json(std::get<MultiOutputModel>(m.model).net, meta);
    }
    nlohmann::json norm = nullptr;
    if (m.normalizer) norm = {{"min", m.normalizer->min}, {"max", m.normalizer->max}};
    return {{"kind", kModelKind}, {"format_version", kModelFormatVersion},
            {"strategy_tag", m.strategy}, {"p", m.p},
            {"q", m.q},                   {"normalization", norm},
            {"model", std::move(payload)}, {"config", config}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.value("kind", "") != kModelKind) throw ConfigError("not a model file (kind is not '" + std::string(kModelKind) + "')");
        if (j.at("format_version").get<int>() != kModelFormatVersion) throw ConfigError("unsupported model format_version");
        TrainedModel m;
        m.strategy = j.at("strategy_tag").get<std::string>();
        m.p = j.at("p").get<Index>();
        m.q = j.at("q").get<Index>();
        if (!j.at("normalization").is_null())
            m.normalizer = Normalizer{j["normalization"].at("min").get<double>(), j["normalization"].at("max").get<double>()};
        const auto& payload = j.at("model");
        if (is_recursive_family(m.strategy)) {
            LoadedMlp l = mlp_from_json(payload);
            RecursiveModel r;
            r.net = std::move(l.net);
            r.p = m.p;
            r.time_step_augmented = l.metadata.time_step_augmented;
            r.max_step = l.metadata.max_step.value_or(0);
            r.validate();
            m.model = std::move(r);
        } else if (is_direct_family(m.strategy)) {
            DirectModelSet d;
            d.p = m.p;
            d.hybrid = m.strategy == "hybrid";
            for (const auto& doc : payload) {
                LoadedMlp l = mlp_from_json(doc);
                if (l.metadata.h.value_or(-1) != static_cast<Index>(d.models.size() + 1))
                    throw ConfigError("direct model set is out of order");
                d.models.push_back(std::move(l.net));
            }
            d.validate();
            if (d.horizon() != m.q) throw ShapeError("direct model set holds " + std::to_string(d.horizon()) + " models, q = " + std::to_string(m.q));
            m.model = std::move(d);
        } else if (is_multi_family(m.strategy)) {
            MultiOutputModel mo;
            mo.net = mlp_from_json(payload).net;
            mo.p = m.p;
            mo.q = m.q;
            mo.validate();
            m.model = std::move(mo);
        } else {
            throw ConfigError("unknown strategy tag '" + m.strategy + "'");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace multistep::app
