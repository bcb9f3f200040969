#include "cqr/param_block.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace cqr {

int ParamBlock::add_matrix(const std::string& name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) {
    throw ConfigError("ParamBlock slot '" + name + "': dimensions must be positive");
  }
  if (find(name) >= 0) {
    throw ConfigError("ParamBlock slot '" + name + "' already exists");
  }
  Slot slot{name, rows, cols, flat_.size()};
  flat_.resize(flat_.size() + slot.count(), 0.0);
  slots_.push_back(std::move(slot));
  return static_cast<int>(slots_.size()) - 1;
}

int ParamBlock::find(std::string_view name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

MatRef ParamBlock::mat(int slot) {
  const Slot& s = slots_.at(static_cast<std::size_t>(slot));
  return MatRef(flat_.data() + s.offset, s.rows, s.cols);
}

CMatRef ParamBlock::mat(int slot) const {
  const Slot& s = slots_.at(static_cast<std::size_t>(slot));
  return CMatRef(flat_.data() + s.offset, s.rows, s.cols);
}

VecRef ParamBlock::vec(int slot) {
  const Slot& s = slots_.at(static_cast<std::size_t>(slot));
  return VecRef(flat_.data() + s.offset, static_cast<int>(s.count()));
}

CVecRef ParamBlock::vec(int slot) const {
  const Slot& s = slots_.at(static_cast<std::size_t>(slot));
  return CVecRef(flat_.data() + s.offset, static_cast<int>(s.count()));
}

ParamBlock ParamBlock::zeros_like() const {
  ParamBlock out;
  out.slots_ = slots_;
  out.flat_.assign(flat_.size(), 0.0);
  return out;
}

void ParamBlock::set_flat(std::span<const double> values) {
  if (values.size() != flat_.size()) {
    throw ShapeError("ParamBlock::set_flat: got " + std::to_string(values.size()) +
                     " values, expected " + std::to_string(flat_.size()));
  }
  std::copy(values.begin(), values.end(), flat_.begin());
}

void ParamBlock::fill(double value) { std::fill(flat_.begin(), flat_.end(), value); }

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

}  // namespace

void save_param_block(const std::filesystem::path& path, const ParamBlock& block,
                      const nlohmann::json& extra) {
  nlohmann::ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["total_params"] = block.size();
  auto slots = nlohmann::ordered_json::array();
  for (const auto& s : block.slots()) {
    slots.push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}, {"offset", s.offset}});
  }
  manifest["slots"] = std::move(slots);
  for (const auto& [key, value] : extra.items()) manifest[key] = value;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path.string());
  out << manifest.dump() << '\n';
  const auto flat = block.flat();
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

LoadedParamBlock load_param_block(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint missing manifest line: " + path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint manifest is not valid JSON (" + path.string() + "): " + e.what());
  }
  if (manifest.value("format_version", 0) != 1) {
    throw DataError("unsupported checkpoint format_version in " + path.string());
  }

  LoadedParamBlock loaded;
  loaded.manifest = manifest;
  std::size_t expected = 0;
  for (const auto& s : manifest.at("slots")) {
    const auto name = s.at("name").get<std::string>();
    const int rows = s.at("rows").get<int>();
    const int cols = s.at("cols").get<int>();
    const auto offset = s.at("offset").get<std::size_t>();
    const int idx = loaded.params.add_matrix(name, rows, cols);
    if (loaded.params.slots()[static_cast<std::size_t>(idx)].offset != offset) {
      throw DataError("checkpoint slot '" + name + "' has inconsistent offset");
    }
    expected += static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }
  if (manifest.at("total_params").get<std::size_t>() != expected) {
    throw DataError("checkpoint total_params does not match slot table");
  }

  std::vector<double> values(expected);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(expected * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(expected * sizeof(double))) {
    throw DataError("checkpoint truncated: " + path.string());
  }
  char trailing;
  if (in.read(&trailing, 1)) throw DataError("checkpoint has trailing bytes: " + path.string());
  loaded.params.set_flat(values);
  if (!all_finite(CVecRef(loaded.params.flat().data(), static_cast<int>(expected)))) {
    throw DataError("checkpoint contains non-finite values: " + path.string());
  }
  return loaded;
}

}  // namespace cqr
