#include "ssc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssc/error.hpp"

namespace ssc {

namespace fs = std::filesystem;

namespace {

bool name_ok(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

void write_blob(const std::string& path, const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write checkpoint blob: " + path);
  }
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xFF);
    }
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_blob(const std::string& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open checkpoint blob: " + path);
  }
  std::vector<unsigned char> bytes(count * 8);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw DataError("checkpoint blob too short: " + path);
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | bytes[i * 8 + b];
    }
    values[i] = std::bit_cast<double>(bits);
  }
  return values;
}

}  // namespace

void save_params(const std::string& dir, const ParamSet& params) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "manifest.txt", std::ios::binary);
  if (!manifest) {
    throw DataError("cannot write checkpoint manifest in " + dir);
  }
  for (const auto& [name, tensor] : params) {
    if (!name_ok(name)) {
      throw std::invalid_argument("save_params: bad tensor name '" + name +
                                  "'");
    }
    manifest << name << ' ' << tensor.ndim();
    for (std::size_t d : tensor.shape()) {
      manifest << ' ' << d;
    }
    manifest << '\n';
    write_blob((fs::path(dir) / (name + ".bin")).string(), tensor.data());
  }
}

ParamSet load_params(const std::string& dir) {
  std::ifstream manifest(fs::path(dir) / "manifest.txt", std::ios::binary);
  if (!manifest) {
    throw DataError("cannot open checkpoint manifest in " + dir);
  }
  ParamSet params;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name;
    std::size_t ndim = 0;
    if (!(fields >> name >> ndim)) {
      throw DataError("checkpoint manifest line " + std::to_string(line_no) +
                      " is malformed");
    }
    Shape shape(ndim);
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      if (!(fields >> shape[i])) {
        throw DataError("checkpoint manifest line " + std::to_string(line_no) +
                        " is missing dimensions");
      }
      count *= shape[i];
    }
    std::vector<double> values =
        read_blob((fs::path(dir) / (name + ".bin")).string(), count);
    params.add(name, Tensor::from_data(std::move(shape), std::move(values)));
  }
  return params;
}

void load_params_into(const std::string& dir, ParamSet& params) {
  ParamSet loaded = load_params(dir);
  if (loaded.size() != params.size()) {
    throw DataError("checkpoint in " + dir + " holds " +
                    std::to_string(loaded.size()) + " tensors, expected " +
                    std::to_string(params.size()));
  }
  for (auto& [name, tensor] : params) {
    const Tensor* src = loaded.find(name);
    if (src == nullptr) {
      throw DataError("checkpoint in " + dir + " is missing tensor '" + name +
                      "'");
    }
    if (src->shape() != tensor.shape()) {
      throw DataError("checkpoint tensor '" + name + "' has the wrong shape");
    }
    tensor.data() = src->data();
  }
}

}  // namespace ssc
