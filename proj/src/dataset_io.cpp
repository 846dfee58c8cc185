#include <fmt/format.h>
#include <fstream>
#include <string>

#include "actdiag/model.hpp"

namespace actdiag {

void write_dataset_csv(const std::filesystem::path& path, const ObservationDataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  std::string line;
  for (const auto& row : data.rows()) {
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += row[i] == ObservationValue::One ? '1' : '0';
    }
    line += '\n';
    out << line;
  }
}

ObservationDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open dataset '{}'", path.string()));
  std::vector<std::vector<int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<int> bits;
    bool expect_value = true;
    for (char c : line) {
      if (expect_value && (c == '0' || c == '1')) {
        bits.push_back(c - '0');
        expect_value = false;
      } else if (!expect_value && c == ',') {
        expect_value = true;
      } else if (c != ' ') {
        throw Error(fmt::format("{}:{}: expected comma-separated 0/1 values", path.string(), line_no));
      }
    }
    if (expect_value) throw Error(fmt::format("{}:{}: trailing comma or empty field", path.string(), line_no));
    if (!rows.empty() && bits.size() != rows.front().size()) {
      throw Error(fmt::format("{}:{}: row has {} values, expected {}", path.string(), line_no, bits.size(),
                              rows.front().size()));
    }
    rows.push_back(std::move(bits));
  }
  if (rows.empty()) throw Error(fmt::format("dataset '{}' is empty", path.string()));
  ObservationDataset data(rows.front().size());
  for (const auto& r : rows) data.add(ObservationVector::from_bits(r));
  return data;
}

}  // namespace actdiag
