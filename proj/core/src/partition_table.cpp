#include "aurk/partition_table.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "aurk/csv.hpp"
#include "aurk/error.hpp"
#include "aurk/roi_layout.hpp"
#include "builtin_data.hpp"

namespace aurk {

namespace {

std::vector<std::string> tokens(std::string_view line) {
  std::istringstream ss{std::string(line)};
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

AuGroup parse_group(const std::vector<std::string>& tok) {
  AuGroup g;
  g.group_id = csv::parse_int(tok.at(1), "group id");
  std::vector<int>* target = nullptr;
  for (std::size_t i = 2; i < tok.size(); ++i) {
    const std::string& t = tok[i];
    if (t == "symmetric") {
      g.symmetric = true;
      target = nullptr;
    } else if (t == "aus") {
      target = &g.aus;
    } else if (t == "rois") {
      target = &g.rois;
    } else if (t == "fetch") {
      target = &g.fetch_from;
    } else if (target != nullptr) {
      target->push_back(csv::parse_int(t, "group " + tok[1] + " entry"));
    } else {
      throw FormatError("unexpected token '" + t + "' in group " + tok[1]);
    }
  }
  return g;
}

}  // namespace

PartitionTable PartitionTable::parse(std::string_view text) {
  PartitionTable table;
  table.hash_ = fnv1a64(text);
  const auto lines = csv::content_lines(text);
  if (lines.empty()) throw FormatError("empty partition table");
  const auto head = tokens(lines.front());
  if (head.size() != 2 || head[0] != "partition")
    throw FormatError("partition table must start with 'partition <version>'");
  table.version_ = csv::parse_int(head[1], "partition version");
  if (table.version_ != 1) throw VersionError("unsupported partition table version " + head[1]);

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto tok = tokens(lines[li]);
    if (tok[0] == "dataset" && tok.size() == 2) {
      table.dataset_ = tok[1];
    } else if (tok[0] == "group" && tok.size() >= 2) {
      table.groups_.push_back(parse_group(tok));
    } else {
      throw FormatError("bad partition table line: " + std::string(lines[li]));
    }
  }
  if (table.dataset_.empty()) throw FormatError("partition table has no 'dataset' line");
  if (table.groups_.empty()) throw FormatError("partition table has no groups");

  std::sort(table.groups_.begin(), table.groups_.end(),
            [](const AuGroup& a, const AuGroup& b) { return a.group_id < b.group_id; });
  std::set<int> ids;
  std::set<int> aus;
  for (const AuGroup& g : table.groups_) {
    if (!ids.insert(g.group_id).second)
      throw FormatError("duplicate group id " + std::to_string(g.group_id));
    if (g.rois.empty()) throw FormatError("group " + std::to_string(g.group_id) + " has no RoIs");
    for (int r : g.rois)
      if (r < 1 || r > kBasicRoiCount)
        throw FormatError("group " + std::to_string(g.group_id) + " names RoI " +
                          std::to_string(r) + " outside 1..43");
    for (int au : g.aus)
      if (!aus.insert(au).second)
        throw FormatError("AU " + std::to_string(au) + " belongs to more than one group");
  }
  for (const AuGroup& g : table.groups_)
    for (int f : g.fetch_from)
      if (!ids.count(f) || f == g.group_id)
        throw FormatError("group " + std::to_string(g.group_id) + " fetches from invalid group " +
                          std::to_string(f));

  table.au_numbers_.assign(aus.begin(), aus.end());
  for (const AuGroup& g : table.groups_) {
    if (g.symmetric) {
      table.slots_.push_back({g.group_id, BoxSide::left});
      table.slots_.push_back({g.group_id, BoxSide::right});
    } else {
      table.slots_.push_back({g.group_id, BoxSide::whole});
    }
  }
  return table;
}

PartitionTable PartitionTable::load(const std::string& path) {
  return parse(csv::read_text_file(path));
}

const PartitionTable& PartitionTable::builtin(std::string_view dataset) {
  static const PartitionTable bp4d = parse(detail::builtin_partition("bp4d"));
  static const PartitionTable disfa = parse(detail::builtin_partition("disfa"));
  static const PartitionTable synthetic = parse(detail::builtin_partition("synthetic"));
  if (dataset == "bp4d") return bp4d;
  if (dataset == "disfa") return disfa;
  if (dataset == "synthetic") return synthetic;
  throw Error("no built-in partition table for dataset '" + std::string(dataset) + "'");
}

const AuGroup& PartitionTable::group(int group_id) const {
  for (const AuGroup& g : groups_)
    if (g.group_id == group_id) return g;
  throw MissingRegionError("no AU group " + std::to_string(group_id));
}

int PartitionTable::au_column(int au) const noexcept {
  const auto it = std::lower_bound(au_numbers_.begin(), au_numbers_.end(), au);
  if (it == au_numbers_.end() || *it != au) return -1;
  return static_cast<int>(it - au_numbers_.begin());
}

// The one place where fetch edges are interpreted.
std::vector<int> PartitionTable::support_columns(int group_id, FetchMode mode) const {
  std::set<int> seen{group_id};
  std::vector<int> frontier{group_id};
  std::set<int> cols;
  for (int au : group(group_id).aus) cols.insert(au_column(au));
  bool first = true;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int gid : frontier)
      for (int f : group(gid).fetch_from)
        if (seen.insert(f).second) {
          for (int au : group(f).aus) cols.insert(au_column(au));
          next.push_back(f);
        }
    if (mode == FetchMode::direct && first) break;
    first = false;
    frontier = std::move(next);
  }
  return {cols.begin(), cols.end()};
}

std::vector<std::uint8_t> PartitionTable::support_matrix(FetchMode mode) const {
  const std::size_t l = au_numbers_.size();
  std::vector<std::uint8_t> out(slots_.size() * l, 0);
  for (std::size_t r = 0; r < slots_.size(); ++r)
    for (int c : support_columns(slots_[r].group_id, mode))
      out[r * l + static_cast<std::size_t>(c)] = 1;
  return out;
}

}  // namespace aurk
