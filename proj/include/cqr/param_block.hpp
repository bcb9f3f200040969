#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cqr/vec.hpp"

namespace cqr {

// Named parameter slots backed by one contiguous flat array. Slot order is
// insertion order; it fixes both the flat-view layout and the checkpoint
// byte layout, so a given model always serializes the same way.
class ParamBlock {
 public:
  struct Slot {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::size_t offset = 0;

    std::size_t count() const {
      return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }
  };

  // Returns the slot index. Vector slots are stored as length x 1.
  int add_matrix(const std::string& name, int rows, int cols);
  int add_vector(const std::string& name, int length) { return add_matrix(name, length, 1); }

  // -1 when no slot has that name.
  int find(std::string_view name) const;

  MatRef mat(int slot);
  CMatRef mat(int slot) const;
  VecRef vec(int slot);
  CVecRef vec(int slot) const;

  std::span<double> flat() { return flat_; }
  std::span<const double> flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }
  const std::vector<Slot>& slots() const { return slots_; }

  // Same slot table, values zeroed. Used for gradient accumulators.
  ParamBlock zeros_like() const;

  void set_flat(std::span<const double> values);
  void fill(double value);

 private:
  std::vector<Slot> slots_;
  std::vector<double> flat_;
};

// Checkpoint layout: one UTF-8 JSON manifest line, '\n', then the flat array
// as little-endian IEEE-754 doubles. `extra` entries are merged into the
// manifest object (used for model shape metadata). Schema in the README.
void save_param_block(const std::filesystem::path& path, const ParamBlock& block,
                      const nlohmann::json& extra = nlohmann::json::object());

struct LoadedParamBlock {
  ParamBlock params;
  nlohmann::json manifest;
};

LoadedParamBlock load_param_block(const std::filesystem::path& path);

}  // namespace cqr
