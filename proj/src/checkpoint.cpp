#include "unlearn/checkpoint.hpp"

#include <bit>
#include <istream>
#include <ostream>

#include "unlearn/common.hpp"

namespace unlearn {

namespace {

constexpr char kMagic[] = "UNLEARN-CKPT";

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw BackendError("checkpoint blobs are little-endian; big-endian hosts are not supported");
  }
}

}  // namespace

const Eigen::MatrixXd& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ParseError(0, "checkpoint has no tensor '" + name + "'");
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  require_little_endian();
  nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                           {"kind", ckpt.kind},
                           {"meta", ckpt.meta},
                           {"tensors", nlohmann::json::array()}};
  for (const auto& [name, t] : ckpt.tensors)
    header["tensors"].push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  out << kMagic << '\n' << header.dump() << '\n';
  for (const auto& [name, t] : ckpt.tensors)
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw Error("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  require_little_endian();
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw ParseError(0, "not an unlearn checkpoint");
  if (!std::getline(in, line)) throw ParseError(0, "checkpoint header missing");
  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(line);
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion)
      throw ParseError(0, "unsupported checkpoint format version " + std::to_string(version));
    ckpt.kind = header.at("kind").get<std::string>();
    ckpt.meta = header.at("meta");
    for (const auto& t : header.at("tensors")) {
      Eigen::MatrixXd m(t.at("rows").get<Eigen::Index>(), t.at("cols").get<Eigen::Index>());
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
      if (!in) throw ParseError(0, "checkpoint truncated in tensor '" + t.at("name").get<std::string>() + "'");
      ckpt.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("checkpoint header: ") + e.what());
  }
  return ckpt;
}

}  // namespace unlearn
