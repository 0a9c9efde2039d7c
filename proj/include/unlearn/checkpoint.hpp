// Self-describing model checkpoint container.
//
// Layout:
//   "UNLEARN-CKPT\n"
//   one line of JSON: {"format_version", "kind", "meta", "tensors": [{name, rows, cols}]}
//   tensor blobs, column-major little-endian float64, in header order
#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace unlearn {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  const Eigen::MatrixXd& tensor(const std::string& name) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace unlearn
