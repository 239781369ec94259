#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skelfreq/classifier.hpp"
#include "skelfreq/features.hpp"

namespace skelfreq {

/// Parses the text of an NTU RGB+D `.skeleton` file into one sequence per
/// distinct body id (in order of first appearance). Frames in which a body is
/// missing repeat that body's nearest observed frame (the earlier one on a
/// tie). Counts are strict: every deviation raises ParseError with the line.
std::vector<SkeletonSequence> parse_ntu_skeleton(std::string_view text, TopologyPtr topology = ntu25_topology());

/// Fields of the NTU file name pattern SsssCcccPpppRrrrAaaa.
struct NtuSampleId {
  int setup = 0;
  int camera = 0;
  int subject = 0;
  int replication = 0;
  int action = 0;  ///< 1-based
};

/// Accepts a bare stem or a path; throws data-error on mismatch.
NtuSampleId parse_ntu_name(std::string_view name);

/// Reads a `.skeleton` file; labels and subjects come from the file name.
std::vector<SkeletonSequence> load_ntu_file(const std::filesystem::path& path,
                                            TopologyPtr topology = ntu25_topology());

/// The 20 training performers of the standard NTU RGB+D cross-subject split.
const std::set<int>& ntu_cross_subject_training_ids();

struct Split {
  Dataset train;
  Dataset test;
};

/// Items whose subject is in `training_subjects` go to train, the rest to
/// test; order within each side follows the input. Items without a subject
/// id have it parsed from meta.name (data-error if that fails).
Split split_cross_subject(const Dataset& data, const std::set<int>& training_subjects);

/// Moves round(fraction × size) seeded-random items of `train` into the
/// validation side (returned as Split{remaining train, validation}).
Split validation_split(const Dataset& train, double fraction, std::uint64_t seed);

struct SyntheticOptions {
  /// Per-coordinate jitter σ in meters; the per-item global offset uses 4σ.
  double noise = 0.005;
  /// Peak swing of the most distal joint, meters.
  double amplitude = 0.12;
};

/// Procedural actions on the NTU skeleton. Class c raises limb c mod 4 (left
/// arm, right arm, left leg, right leg) and swings it at 1 + c/4 cycles per
/// sequence with a random phase and ±15 % amplitude jitter. Item i of a class
/// gets subject (i mod 40) + 1 and an NTU-style name. Deterministic per seed.
Dataset synthetic_actions(std::size_t class_count, std::size_t per_class, std::size_t frames, std::uint64_t seed,
                          const SyntheticOptions& options = {});

// Internal JSON interchange for one sequence:
// {"n":N,"t":T,"label":L,"subject":S,"positions":[[[x,y,z] × N] × T]}
// plus optional name, setup, camera, replication and history.
std::string sequence_to_json(const SkeletonSequence& seq);
SkeletonSequence sequence_from_json(std::string_view text, TopologyPtr topology = ntu25_topology());

/// Loads every `*.json` and `*.skeleton` file of a directory (sorted by name),
/// or a single file.
Dataset load_dataset(const std::filesystem::path& path, TopologyPtr topology = ntu25_topology());

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and an atomic rename.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace skelfreq
