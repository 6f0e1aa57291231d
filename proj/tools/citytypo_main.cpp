#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "citytypo/config.hpp"
#include "citytypo/errors.hpp"
#include "citytypo/pipeline.hpp"

using namespace citytypo;

int main(int argc, char** argv) {
    CLI::App app{"citytypo: predict a city's transportation typology from its encyclopedia page"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string task_name_arg;
    std::string only_city;
    bool offline_flag = false;

    auto add_common = [&](CLI::App* cmd, bool with_task) {
        cmd->add_option("--config", config_path, "pipeline config file")->required();
        cmd->add_option("--seed", seed_override, "override [split] seed");
        if (with_task) {
            cmd->add_option("--task", task_name_arg, "congestion|auto|transit|bike")->required();
        }
        return cmd;
    };

    auto* ingest = add_common(app.add_subcommand("ingest", "fetch pages, extract sentences and infobox numerics"), false);
    ingest->add_flag("--offline", offline_flag, "serve only from the page cache");
    add_common(app.add_subcommand("embed", "embed extracted sentences into the embedding cache"), false);
    add_common(app.add_subcommand("candidates", "extract candidate keylines from positive train cities"), true);
    add_common(app.add_subcommand("expand", "greedy cross-validated keyline set expansion"), true);
    add_common(app.add_subcommand("train", "train the typology model for one task"), true);
    add_common(app.add_subcommand("sweep", "run the 21-subset feature sweep for one task"), true);
    auto* predict = add_common(app.add_subcommand("predict", "batch-score cities with the trained models"), false);
    predict->add_option("--city", only_city, "score a single city_id");
    add_common(app.add_subcommand("feasibility", "via contingency ratios and the feasibility model"), false);

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig config = load_config(config_path);
        if (seed_override) config.split_seed = *seed_override;
        if (offline_flag) config.offline = true;

        auto task = [&]() { return typology_from_name(task_name_arg); };

        if (app.got_subcommand("ingest")) return cmd_ingest(config);
        if (app.got_subcommand("embed")) return cmd_embed(config);
        if (app.got_subcommand("candidates")) return cmd_candidates(config, task());
        if (app.got_subcommand("expand")) return cmd_expand(config, task());
        if (app.got_subcommand("train")) return cmd_train(config, task());
        if (app.got_subcommand("sweep")) return cmd_sweep(config, task());
        if (app.got_subcommand("predict")) {
            return cmd_predict(config, only_city.empty() ? std::nullopt
                                                         : std::optional<std::string>(only_city));
        }
        if (app.got_subcommand("feasibility")) return cmd_feasibility(config);
        return kExitFatal;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const FetchError& e) {
        std::cerr << "fetch error" << (e.retriable() ? " (retriable)" : "") << ": " << e.what()
                  << "\n";
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}
