#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdsm/errors.hpp"
#include "cdsm/hierarchy.hpp"

namespace cdsm {

inline constexpr const char* kModelFormat = "cdsm-model-1";

/// Serialize a model to JSON. Embeddings may be omitted to keep the file
/// small, at the cost of the nearest-neighbor fallback for transitions
/// never seen in training.
inline nlohmann::json model_to_json(const HierarchyModel& model, bool include_embeddings = true) {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["env"] = model.config.env;
    j["seed"] = model.config.seed;
    j["collapse"] = model.config.collapse;
    j["norm"] = model.config.norm == SpectralNorm::DegreeNormalized ? "degree" : "symmetric";
    j["stopped_early"] = model.stopped_early;
    {
        nlohmann::json specs = nlohmann::json::array();
        for (const LevelSpec& s : model.config.specs) {
            specs.push_back({{"n_clusters", s.n_clusters}, {"embed_dim", s.embed_dim}});
        }
        j["specs"] = std::move(specs);
    }
    j["raw_alphabet"] = model.raw_symbols;

    nlohmann::json levels = nlohmann::json::array();
    for (const Level& level : model.levels) {
        nlohmann::json lj;
        lj["n_clusters"] = level.n_clusters;
        lj["embed_dim"] = level.embed_dim;
        nlohmann::json pairs = nlohmann::json::array();
        for (std::uint64_t packed : level.pairs.raws()) {
            const auto [a, b] = unpack_pair(packed);
            pairs.push_back({a, b});
        }
        lj["pairs"] = std::move(pairs);
        lj["assignment"] = level.assignment;
        lj["eigenvalues"] = level.embedding.eigenvalues;
        lj["excluded"] = level.embedding.excluded;
        if (include_embeddings) {
            nlohmann::json points = nlohmann::json::array();
            for (std::size_t r = 0; r < level.embedding.points.rows(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t c = 0; c < level.embedding.points.cols(); ++c) {
                    row.push_back(level.embedding.points(r, c));
                }
                points.push_back(std::move(row));
            }
            lj["embedding"] = std::move(points);
        }
        levels.push_back(std::move(lj));
    }
    j["levels"] = std::move(levels);
    return j;
}

inline HierarchyModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != kModelFormat) {
            throw ParseError("unsupported model format: " + j.at("format").dump());
        }
        HierarchyModel model;
        model.config.env = j.value("env", std::string{});
        model.config.seed = j.at("seed").get<std::uint64_t>();
        model.config.collapse = j.at("collapse").get<bool>();
        model.config.norm = j.value("norm", std::string{"degree"}) == "symmetric"
                                ? SpectralNorm::Symmetric
                                : SpectralNorm::DegreeNormalized;
        model.stopped_early = j.at("stopped_early").get<bool>();
        for (const auto& s : j.at("specs")) {
            model.config.specs.push_back(
                {s.at("n_clusters").get<std::int32_t>(), s.at("embed_dim").get<std::int32_t>()});
        }
        model.raw_symbols = j.at("raw_alphabet").get<std::vector<std::string>>();

        for (const auto& lj : j.at("levels")) {
            Level level;
            level.n_clusters = lj.at("n_clusters").get<std::int32_t>();
            level.embed_dim = lj.at("embed_dim").get<std::int32_t>();
            for (const auto& p : lj.at("pairs")) {
                level.pairs.intern(pack_pair(p.at(0).get<std::int32_t>(),
                                             p.at(1).get<std::int32_t>()));
            }
            level.assignment = lj.at("assignment").get<std::vector<std::int32_t>>();
            level.embedding.k = level.embed_dim;
            level.embedding.eigenvalues = lj.at("eigenvalues").get<std::vector<double>>();
            level.embedding.excluded = lj.at("excluded").get<std::vector<std::int32_t>>();
            const std::size_t m = level.pairs.raws().size();
            level.embedding.points =
                Matrix<double>(m, static_cast<std::size_t>(level.embed_dim));
            if (lj.contains("embedding")) {
                const auto& points = lj.at("embedding");
                for (std::size_t r = 0; r < m; ++r) {
                    for (std::size_t c = 0; c < static_cast<std::size_t>(level.embed_dim); ++c) {
                        level.embedding.points(r, c) = points.at(r).at(c).get<double>();
                    }
                }
            }
            if (level.assignment.size() != m) {
                throw ParseError("model level assignment size mismatch");
            }
            model.levels.push_back(std::move(level));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
}

inline void save_model(const std::filesystem::path& path, const HierarchyModel& model,
                       bool include_embeddings = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << model_to_json(model, include_embeddings).dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline HierarchyModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model file: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace cdsm
