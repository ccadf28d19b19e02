#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "bctopt/geometry.hpp"
#include "bctopt/levelset.hpp"

namespace bctopt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat "key = value" file with [section] headers and # comments.  Keys
/// are stored as "section.key".  Values are parsed on access; arrays use
/// bracket syntax: alpha = [0.1, 10.0, 3.0].
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::string origin_;
  std::map<std::string, std::string> entries_;
};

/// Boolean predicate over face centroid coordinates, parsed from an
/// expression such as "z^2 + y^2 < 0.1" or "x < 0 and y > 0".  Supports
/// + - * / ^ (integer powers), parentheses, the comparisons < <= > >=,
/// and the connectives "and" / "or".
class FacePredicate {
 public:
  static FacePredicate parse(const std::string& text);
  bool operator()(const Vec3& point) const;
  const std::string& text() const { return text_; }

 private:
  struct Node;
  std::string text_;
  std::shared_ptr<const Node> root_;
};

struct MeshSpec {
  enum class Source { Ellipsoid, MshFile };
  Source source = Source::Ellipsoid;
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  int subdivisions = 10;
  std::string path;
};

/// Reference partition: either a named preset ("two_material",
/// "three_material") or explicit region predicates evaluated at face
/// centroids, first match wins, unmatched faces get the last label.
struct ReferenceSpec {
  std::string preset;
  std::vector<std::string> region_predicates;
};

struct ExperimentConfig {
  MeshSpec mesh;
  int material_count = 3;
  std::vector<double> alpha;
  std::vector<double> lower;
  std::vector<double> upper;
  double lambda = 0.0;
  double source_value = 1.0;
  ReferenceSpec reference;
  OptimizerConfig optimizer;
  double solver_tolerance = 1e-10;
  std::string output_directory = "out";
  /// Snapshot cadence in accepted steps (0 writes only start and end).
  int snapshot_every = 10;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_key_values(const KeyValueFile& kv);

  /// Re-serialization in the same flat format; loading the result yields
  /// an equivalent configuration.
  std::string serialize() const;

  /// Throws ConfigError on out-of-range or inconsistent settings.
  void validate() const;
};

}  // namespace bctopt
