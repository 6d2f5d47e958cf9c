// Command-line driver for the context-discovery pipeline:
//   explore    simulate an environment and write the observation stream
//   build      construct the hierarchical transition model from a stream
//   evaluate   run the test-room protocol, heat-maps, and the report
//   fourrooms  the four-room spectral embedding demo
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cdsm/errors.hpp"
#include "cdsm/evaluate.hpp"
#include "cdsm/gridworld.hpp"
#include "cdsm/hierarchy.hpp"
#include "cdsm/io.hpp"
#include "cdsm/model_io.hpp"
#include "cdsm/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDegenerate = 4;

struct Flags {
    CLI::Option* env = nullptr;
    CLI::Option* steps = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* config = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* levels = nullptr;
    CLI::Option* embed_dim = nullptr;
    CLI::Option* no_collapse = nullptr;
    CLI::Option* steps_per_room = nullptr;
};

struct FlagValues {
    std::string env;
    std::uint64_t steps = 0;
    std::uint64_t seed = 0;
    std::string config_path;
    std::string out;
    std::vector<std::int32_t> levels;
    std::int32_t embed_dim = 0;
    bool no_collapse = false;
    std::uint64_t steps_per_room = 0;
};

// Config file first, explicit flags on top.
cdsm::PipelineConfig resolve_config(const Flags& f, const FlagValues& v) {
    cdsm::PipelineConfig cfg;
    if (f.config && f.config->count()) cfg = cdsm::load_config(v.config_path, cfg);
    if (f.env && f.env->count()) cfg.env = v.env;
    if (f.steps && f.steps->count()) cfg.steps = v.steps;
    if (f.seed && f.seed->count()) cfg.seed = v.seed;
    if (f.out && f.out->count()) cfg.out_dir = v.out;
    if (f.levels && f.levels->count()) cfg.cluster_counts = v.levels;
    if (f.embed_dim && f.embed_dim->count()) cfg.embed_dim = v.embed_dim;
    if (f.no_collapse && f.no_collapse->count()) cfg.collapse = false;
    if (f.steps_per_room && f.steps_per_room->count()) cfg.steps_per_room = v.steps_per_room;
    cdsm::validate(cfg);
    return cfg;
}

std::filesystem::path ensure_out_dir(const cdsm::PipelineConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

int cmd_explore(const cdsm::PipelineConfig& cfg) {
    const cdsm::EnvKind kind = cdsm::parse_env(cfg.env);
    const cdsm::ExplorationResult run = cdsm::run_exploration(kind, cfg.steps, cfg.seed);
    const cdsm::StreamFile file = cdsm::intern_exploration(run);
    const std::filesystem::path out = ensure_out_dir(cfg) / "stream.txt";
    cdsm::write_stream_file(out, file);
    std::cout << "env: " << cfg.env << "\n"
              << "steps: " << cfg.steps << "\n"
              << "alphabet size: " << file.symbols.size() << "\n"
              << "stream file: " << out.string() << "\n";
    return kExitOk;
}

int cmd_build(const cdsm::PipelineConfig& cfg, const std::string& stream_path) {
    const cdsm::StreamFile file = cdsm::read_stream_file(stream_path);
    const std::filesystem::path dir = ensure_out_dir(cfg);

    const std::vector<cdsm::LevelSpec> specs = cdsm::level_specs(cfg);
    cdsm::HierarchyModel model = cdsm::build_hierarchy(file.symbols, file.stream, specs,
                                                       cfg.seed, cfg.collapse);
    model.config.env = file.env;

    for (std::size_t lvl = 0; lvl < model.levels.size(); ++lvl) {
        const cdsm::Level& level = model.levels[lvl];
        std::cout << "level " << lvl << ": " << level.pairs.size() << " unique transitions -> "
                  << level.n_clusters << " units; eigenvalues";
        for (double v : level.embedding.eigenvalues) {
            std::printf(" %.4f", v);
        }
        std::cout << "\n";
    }
    if (model.stopped_early) {
        std::cout << "stopped early after " << model.levels.size() << " of " << specs.size()
                  << " levels\n";
    }

    if (!model.levels.empty()) {
        // Level-0 transition matrix and its pair alphabet, for inspection.
        cdsm::InternResult pairs = cdsm::extract_transitions(file.stream);
        const cdsm::Matrix<double> t =
            cdsm::row_normalize(cdsm::count_matrix(pairs.stream, pairs.alphabet.size()));
        cdsm::write_matrix_csv(dir / "level0_transition.csv", t);
        std::vector<std::string> pair_names;
        pair_names.reserve(static_cast<std::size_t>(pairs.alphabet.size()));
        for (std::uint64_t packed : pairs.alphabet.raws()) {
            const auto [a, b] = cdsm::unpack_pair(packed);
            pair_names.push_back(file.symbols[static_cast<std::size_t>(a)] + " -> " +
                                 file.symbols[static_cast<std::size_t>(b)]);
        }
        cdsm::write_alphabet_sidecar(dir / "level0_pairs.csv", pair_names);
    }

    const std::filesystem::path model_path = dir / "model.json";
    cdsm::save_model(model_path, model);
    std::cout << "model file: " << model_path.string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const cdsm::PipelineConfig& cfg, const std::string& model_path) {
    const cdsm::HierarchyModel model = cdsm::load_model(model_path);
    if (model.config.env != "sy_rooms") {
        throw cdsm::ConfigError("evaluate requires a model built on sy_rooms, got: " +
                                model.config.env);
    }
    const std::filesystem::path dir = ensure_out_dir(cfg);
    const cdsm::TestRoomsResult result =
        cdsm::run_test_rooms(model, cfg.seed, cfg.steps_per_room);

    for (const cdsm::TestRoomRun& run : result.runs) {
        const std::string room = run.type == cdsm::RoomType::S ? "S" : "Y";
        for (std::size_t lvl = 0; lvl < model.levels.size(); ++lvl) {
            for (std::int32_t unit = 0; unit < model.levels[lvl].n_clusters; ++unit) {
                const cdsm::Heatmap h =
                    cdsm::make_heatmap(run.timeline, run.trace, static_cast<int>(lvl), unit,
                                       run.grid.height(), run.grid.width());
                const std::string base =
                    "level" + std::to_string(lvl) + "_unit" + std::to_string(unit) + "_" + room;
                cdsm::export_heatmap_pgm(h, dir / (base + ".pgm"));
                cdsm::write_matrix_csv(dir / (base + ".csv"), h.weights);
            }
        }
    }

    const cdsm::SeparationReport report = cdsm::separation_report(result);
    cdsm::write_separation_report(dir / "report.json", report);
    if (!report.accuracy) {
        std::cerr << "degenerate top level: a unit never activates (report written)\n";
        return kExitDegenerate;
    }
    std::cout << "accuracy: " << *report.accuracy << "\n";
    return kExitOk;
}

int cmd_fourrooms(const cdsm::PipelineConfig& cfg, const std::string& mode_name) {
    const cdsm::ObservabilityMode mode = mode_name == "full" ? cdsm::ObservabilityMode::Full
                                                             : cdsm::ObservabilityMode::Partial;
    const std::filesystem::path dir = ensure_out_dir(cfg);
    const cdsm::FourRoomsDemoResult demo = cdsm::run_fourrooms_demo(mode, 100000, cfg.seed);

    cdsm::write_matrix_csv(dir / "transition.csv", demo.transition);
    cdsm::write_alphabet_sidecar(dir / "alphabet.csv", demo.stream.symbols);
    cdsm::write_embedding_csv(dir / "embedding.csv", demo.embedding);
    cdsm::write_clusters_csv(dir / "clusters.csv", demo.embedded_ids, demo.clusters.labels);

    std::cout << "embedded symbols: " << demo.embedded_ids.size() << "\n"
              << "pair-counting purity: " << demo.purity << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensorimotor context discovery from observation streams"};
    app.require_subcommand(1);

    FlagValues v;
    auto add_common = [&](CLI::App* cmd, bool with_pipeline) {
        Flags f;
        f.seed = cmd->add_option("--seed", v.seed, "RNG seed");
        f.config = cmd->add_option("--config", v.config_path, "JSON config file");
        f.out = cmd->add_option("--out", v.out, "output directory");
        if (with_pipeline) {
            f.levels = cmd->add_option("--levels", v.levels, "cluster count per level")
                           ->delimiter(',');
            f.embed_dim = cmd->add_option("--embed-dim", v.embed_dim, "spectral dimensions");
            f.no_collapse = cmd->add_flag("--no-collapse", v.no_collapse,
                                          "keep repeated meta-observations between levels");
            f.steps_per_room = cmd->add_option("--steps-per-room", v.steps_per_room,
                                               "evaluation steps per test room");
        }
        return f;
    };

    CLI::App* explore = app.add_subcommand("explore", "simulate and write a stream file");
    Flags ef = add_common(explore, false);
    ef.env = explore->add_option("--env", v.env, "four_rooms_full|four_rooms_partial|sy_rooms");
    ef.steps = explore->add_option("--steps", v.steps, "number of exploration steps");

    std::string stream_path;
    CLI::App* build = app.add_subcommand("build", "build the hierarchical model from a stream");
    Flags bf = add_common(build, true);
    build->add_option("stream", stream_path, "stream file from explore")->required();

    std::string model_path;
    CLI::App* evaluate = app.add_subcommand("evaluate", "test rooms, heat-maps, report");
    Flags vf = add_common(evaluate, true);
    evaluate->add_option("model", model_path, "model file from build")->required();

    std::string mode;
    CLI::App* fourrooms = app.add_subcommand("fourrooms", "four-room embedding demo");
    Flags ff = add_common(fourrooms, false);
    fourrooms->add_option("mode", mode, "full|partial")
        ->required()
        ->check(CLI::IsMember({"full", "partial"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (explore->parsed()) return cmd_explore(resolve_config(ef, v));
        if (build->parsed()) return cmd_build(resolve_config(bf, v), stream_path);
        if (evaluate->parsed()) return cmd_evaluate(resolve_config(vf, v), model_path);
        if (fourrooms->parsed()) return cmd_fourrooms(resolve_config(ff, v), mode);
    } catch (const cdsm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cdsm::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const cdsm::ConvergenceFailure& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const cdsm::DegenerateTopLevel& e) {
        std::cerr << "degenerate result: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const cdsm::UnknownObservation& e) {
        std::cerr << "degenerate result: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
