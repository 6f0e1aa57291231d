#pragma once

#include <memory>
#include <optional>
#include <string>

#include "citytypo/config.hpp"
#include "citytypo/embedding.hpp"
#include "citytypo/keyline.hpp"
#include "citytypo/types.hpp"

namespace citytypo {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;  // some cities failed
inline constexpr int kExitFatal = 2;    // config / data error

// Stage commands. Each is a pure function of (config, input artifacts, seed):
// rerunning writes byte-identical outputs. Logs go to stderr. ConfigError /
// DataError propagate to the caller, which maps them to kExitFatal.
int cmd_ingest(const PipelineConfig& config);
int cmd_embed(const PipelineConfig& config);
int cmd_candidates(const PipelineConfig& config, Typology task);
int cmd_expand(const PipelineConfig& config, Typology task);
int cmd_train(const PipelineConfig& config, Typology task);
int cmd_sweep(const PipelineConfig& config, Typology task);
int cmd_predict(const PipelineConfig& config, const std::optional<std::string>& only_city = {});
int cmd_feasibility(const PipelineConfig& config);

// Encoder selected by [encoder]; shared by commands and tests.
std::unique_ptr<SentenceEncoder> make_encoder(const PipelineConfig& config);

// Anchor texts with config overrides applied, embedded with the encoder.
std::array<AnchorText, 4> config_anchors(const PipelineConfig& config, SentenceEncoder& encoder);

// Output artifact locations under [paths] output.
struct OutPaths {
    explicit OutPaths(const PipelineConfig& config);
    std::string sentences;
    std::string infobox;
    std::string predictions;
    std::string via_ratios;
    std::string feasibility_summary;
    std::string candidates(Typology task) const;
    std::string keylines(Typology task, KeylineStage stage) const;
    std::string trajectory(Typology task) const;
    std::string model(LabelTask task) const;
    std::string sweep(Typology task) const;

private:
    std::string dir_;
};

}  // namespace citytypo
