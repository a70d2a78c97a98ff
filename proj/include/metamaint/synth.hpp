#pragma once

#include "metamaint/error.hpp"
#include "metamaint/gitio.hpp"
#include "metamaint/language.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Synthetic corpora of real git repositories with planted seed families,
// plus the ground truth the analysis is expected to recover. The truth is
// computed from an in-memory model of the generated histories, not from git.
namespace metamaint::synth {

class OutDirNotEmpty : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public Error {
public:
    using Error::Error;
};

enum class VariantPlan {
    unchanged,    // seed copied in, never touched
    edit,         // `edits` unique edits
    revert,       // `edits` unique edits, then the seed content restored
    cherry_pick,  // the family's shared edit first, then `edits` unique edits
    duplicate,    // ends at the family's shared duplicate content by its own route
    remove,       // `edits` unique edits, then the file deleted
    rename,       // `edits` unique edits, then the file moved to a new path
    topic_only,   // one edit on a branch that never reaches the main branch
    merged_topic, // one edit on a branch merged into the main branch
};

std::string_view to_string(VariantPlan p);

struct PlantedVariant {
    std::size_t repo = 0;
    VariantPlan plan = VariantPlan::unchanged;
    std::size_t edits = 0;
    std::size_t fix_edits = 0; // leading unique edits whose message names a fix
    bool extra_copy = false;   // an untouched second copy in the same repo
};

struct PlantedFamily {
    Language language = Language::C;
    bool empty_seed = false; // seed holds only comments
    std::vector<PlantedVariant> variants; // distinct repos, at least 2
};

struct SynthRepo {
    std::string main_branch = "master";
    bool dormant = false;
    std::optional<std::size_t> copy_of; // byte-identical clone of another repo
    bool stale_master = false;          // extra "master" branch left at the first commit
    bool declare_branch = false;        // write main_branch into the manifest
};

struct SynthSpec {
    std::vector<SynthRepo> repos;
    std::vector<PlantedFamily> families;
    std::uint64_t rng_seed = 0;
    gitio::Timestamp reference_date = 1546300800; // 2019-01-01
    int dormancy_days = 365;
    std::vector<std::string> keywords = {"fix"};
    std::size_t max_unique = 2;

    /// Throws InvalidSpec.
    void validate() const;
};

/// A random spec with 2..max_repos repositories and 1..max_families planted
/// families.
SynthSpec random_spec(std::uint64_t seed, std::size_t max_repos = 15, std::size_t max_families = 6);

inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kTruthName = "truth.json";

/// Creates out_dir/repos/<id>.git, out_dir/manifest.jsonl and
/// out_dir/truth.json. Returns the manifest path.
std::filesystem::path generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

/// The ground truth alone, as written to truth.json.
std::string ground_truth_json(const SynthSpec& spec);

} // namespace metamaint::synth
