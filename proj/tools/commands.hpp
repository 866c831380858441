#pragma once

#include <json.hpp>

#include <chrono>
#include <string>
#include <vector>

#include "elastmatch/geometry.hpp"
#include "elastmatch/matcher.hpp"

namespace elastmatch::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitMeshFailure = 3;
inline constexpr int kExitNumerical = 4;

struct MatchFlags {
  std::string source;
  std::string target;
  std::string mesh_path;  // optional prebuilt OFF mesh for the source
  std::string out = "out";
  double alpha = 0.0;
  double beta = 1.0;
  int max_iters = 50;
  double stop_fraction = 0.01;
  double fd_step = 0.0;
  double distortion_bound = 0.0;
  double mu = 1.0;
  double lambda = 0.0;
  unsigned seed = 0;  // reserved; the pipeline is deterministic
};

struct SymdiffFlags {
  std::string a;
  std::string b;
  std::string svg;       // when set, draw the clipped region here
  std::string gradient;  // when set, write per-vertex normal derivatives here
};

struct MeshFlags {
  std::string shape;
  std::string out = "out";
  double max_area = 0.0;
  double min_angle = 25.0;
};

int run_match(const MatchFlags& f);
int run_compare(const MatchFlags& f);
int run_symdiff(const SymdiffFlags& f);
int run_mesh(const MeshFlags& f);

// Shared plumbing (defined in cmd_match.cpp).
Polygon single_ring(const PolygonSet& s, const std::string& what);
MatchConfig config_from(const MatchFlags& f);
nlohmann::json config_echo(const MatchFlags& f);
nlohmann::json inputs_echo(const MatchFlags& f);
void write_iterations_csv(const std::string& path, const std::vector<IterationRecord>& rows);
void write_result_json(const std::string& path, const MatchResult& r);
void write_text_file(const std::string& path, const std::string& text);
void write_final_overlay(const std::string& path, const Polygon& target, const MatchResult& r);
double seconds_since(std::chrono::steady_clock::time_point t0);

}  // namespace elastmatch::cli
