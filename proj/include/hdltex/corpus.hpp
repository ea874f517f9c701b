#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hdltex {

// One labeled record. `text` is stored cleaned; `child_label` is globally
// unique across parents in a well-formed dataset.
struct Document {
  std::uint64_t id = 0;
  std::string text;
  std::string parent_label;
  std::string child_label;
};

// Two-level label hierarchy. Parent order and per-parent child order follow
// first appearance in the source file, so they are stable across runs.
class LabelSpace {
 public:
  void add_pair(const std::string& parent, const std::string& child);

  const std::vector<std::string>& parents() const { return parents_; }
  const std::vector<std::string>& children_of(const std::string& parent) const;

  bool has_parent(const std::string& parent) const;
  int parent_index(const std::string& parent) const;           // -1 if absent
  int child_index(const std::string& parent, const std::string& child) const;

  // Parent owning `child`, or empty string.
  std::string parent_of_child(const std::string& child) const;

  std::size_t total_children() const;

 private:
  std::vector<std::string> parents_;
  std::map<std::string, std::vector<std::string>> children_;
  std::map<std::string, std::string> child_to_parent_;
};

struct Dataset {
  std::string name;
  std::vector<Document> documents;
  LabelSpace labels;

  std::size_t size() const { return documents.size(); }
};

// Canonical 3-column TSV: parent<TAB>child<TAB>text. `#` lines are comments.
// Text is cleaned on ingest; rows that clean to empty are rejected.
Dataset parse_tsv(const std::string& path, bool lowercase = true);

void write_tsv(const Dataset& ds, const std::string& path);

// WOS release layout: X.txt one document per line, YL1.txt/YL2.txt integer
// labels per line. The optional names file maps ids to label names with
// lines "L1 <id> <name...>" and "L2 <id> <name...>"; missing names fall
// back to L1_<id>/L2_<id>.
Dataset load_wos_layout(const std::string& x_path, const std::string& yl1_path,
                        const std::string& yl2_path,
                        const std::string& names_path = "",
                        bool lowercase = true);

// Per-child-label proportional split, deterministic for a fixed seed.
// Every stratum keeps at least one document on each side.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed);

// Documents of one parent, with the label space narrowed to that parent.
Dataset domain_subset(const Dataset& ds, const std::string& parent);

}  // namespace hdltex
