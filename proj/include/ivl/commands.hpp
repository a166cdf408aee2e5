#pragma once

#include <string>

#include "ivl/manifest.hpp"

namespace ivl::cli {

// Applies the --threads cap (0 = library default).
void apply_threads(const Manifest& m);

// Writes the resolved manifest and a tool-version stamp into out_dir, so any
// result directory is reproducible from its own contents.
void stamp_output(const Manifest& m);

// Loads a dataset by role ("train"/"eval"), preferring a prepared cache under
// out_dir/cache. Face datasets are preprocessed on load.
ingest::RawDataset resolve_dataset(const Manifest& m, const std::string& role);

void cmd_prepare(const Manifest& m);
void cmd_train(const Manifest& m);
void cmd_eval(const Manifest& m);
void cmd_sweep(const Manifest& m);
void cmd_viz(const Manifest& m);

// Paths produced by the commands (relative to out_dir).
std::string checkpoint_path(const Manifest& m, const std::string& model);

}  // namespace ivl::cli
