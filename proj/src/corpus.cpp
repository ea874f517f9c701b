#include "hdltex/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hdltex/common.hpp"
#include "hdltex/rng.hpp"
#include "hdltex/text.hpp"

namespace hdltex {

void LabelSpace::add_pair(const std::string& parent, const std::string& child) {
  auto owner = child_to_parent_.find(child);
  if (owner != child_to_parent_.end()) {
    if (owner->second != parent) {
      throw DataError("child label '" + child + "' appears under parents '" +
                      owner->second + "' and '" + parent + "'");
    }
    return;
  }
  if (children_.find(parent) == children_.end()) {
    parents_.push_back(parent);
    children_[parent] = {};
  }
  children_[parent].push_back(child);
  child_to_parent_[child] = parent;
}

const std::vector<std::string>& LabelSpace::children_of(
    const std::string& parent) const {
  auto it = children_.find(parent);
  if (it == children_.end()) {
    throw DataError("unknown parent label '" + parent + "'");
  }
  return it->second;
}

bool LabelSpace::has_parent(const std::string& parent) const {
  return children_.find(parent) != children_.end();
}

int LabelSpace::parent_index(const std::string& parent) const {
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    if (parents_[i] == parent) return static_cast<int>(i);
  }
  return -1;
}

int LabelSpace::child_index(const std::string& parent,
                            const std::string& child) const {
  const auto& kids = children_of(parent);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (kids[i] == child) return static_cast<int>(i);
  }
  return -1;
}

std::string LabelSpace::parent_of_child(const std::string& child) const {
  auto it = child_to_parent_.find(child);
  return it == child_to_parent_.end() ? std::string() : it->second;
}

std::size_t LabelSpace::total_children() const {
  std::size_t n = 0;
  for (const auto& [parent, kids] : children_) n += kids.size();
  return n;
}

Dataset parse_tsv(const std::string& path, bool lowercase) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  Dataset ds;
  ds.name = path;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::size_t t1 = line.find('\t');
    std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                             : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos) {
      throw DataError("line " + std::to_string(line_no) +
                      ": expected 3 tab-separated fields");
    }
    std::string parent = line.substr(0, t1);
    std::string child = line.substr(t1 + 1, t2 - t1 - 1);
    std::string text = clean_text(line.substr(t2 + 1), lowercase);
    if (parent.empty() || child.empty()) {
      throw DataError("line " + std::to_string(line_no) + ": empty label");
    }
    if (text.empty()) {
      throw DataError("line " + std::to_string(line_no) +
                      ": text empty after cleaning");
    }
    ds.labels.add_pair(parent, child);
    ds.documents.push_back(
        {static_cast<std::uint64_t>(ds.documents.size()), text, parent, child});
  }
  if (ds.documents.empty()) throw DataError("no documents in '" + path + "'");
  return ds;
}

void write_tsv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  for (const auto& doc : ds.documents) {
    out << doc.parent_label << '\t' << doc.child_label << '\t' << doc.text
        << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A single trailing blank line comes from the final newline.
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

Dataset load_wos_layout(const std::string& x_path, const std::string& yl1_path,
                        const std::string& yl2_path,
                        const std::string& names_path, bool lowercase) {
  auto docs = read_lines(x_path);
  auto yl1 = read_lines(yl1_path);
  auto yl2 = read_lines(yl2_path);
  if (docs.size() != yl1.size() || docs.size() != yl2.size()) {
    throw DataError("WOS layout: line counts differ (X=" +
                    std::to_string(docs.size()) + ", YL1=" +
                    std::to_string(yl1.size()) + ", YL2=" +
                    std::to_string(yl2.size()) + ")");
  }

  std::map<long, std::string> l1_names, l2_names;
  if (!names_path.empty()) {
    for (const auto& line : read_lines(names_path)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string level;
      long id;
      if (!(ss >> level >> id)) {
        throw DataError("names file: bad line '" + line + "'");
      }
      std::string name;
      std::getline(ss, name);
      while (!name.empty() && name.front() == ' ') name.erase(name.begin());
      if (name.empty()) throw DataError("names file: missing name in '" + line + "'");
      if (level == "L1") l1_names[id] = name;
      else if (level == "L2") l2_names[id] = name;
      else throw DataError("names file: level must be L1 or L2 in '" + line + "'");
    }
  }

  auto name_of = [](std::map<long, std::string>& names, const char* prefix,
                    long id) {
    auto it = names.find(id);
    return it != names.end() ? it->second : prefix + std::to_string(id);
  };

  Dataset ds;
  ds.name = x_path;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    long p, c;
    try {
      p = std::stol(yl1[i]);
      c = std::stol(yl2[i]);
    } catch (const std::exception&) {
      throw DataError("label line " + std::to_string(i + 1) +
                      ": expected integer labels");
    }
    std::string text = clean_text(docs[i], lowercase);
    if (text.empty()) {
      throw DataError("X line " + std::to_string(i + 1) +
                      ": text empty after cleaning");
    }
    std::string parent = name_of(l1_names, "L1_", p);
    std::string child = name_of(l2_names, "L2_", c);
    ds.labels.add_pair(parent, child);
    ds.documents.push_back(
        {static_cast<std::uint64_t>(ds.documents.size()), text, parent, child});
  }
  if (ds.documents.empty()) throw DataError("no documents in '" + x_path + "'");
  return ds;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DataError("train fraction must be in (0,1)");
  }

  // Strata in label-space order so the shuffle sequence is reproducible.
  std::vector<std::vector<std::size_t>> strata;
  for (const auto& parent : ds.labels.parents()) {
    for (const auto& child : ds.labels.children_of(parent)) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < ds.documents.size(); ++i) {
        if (ds.documents[i].child_label == child) idx.push_back(i);
      }
      if (idx.size() == 1) {
        throw DataError("child label '" + child +
                        "' has a single document; cannot split");
      }
      if (!idx.empty()) strata.push_back(std::move(idx));
    }
  }

  Rng rng(seed);
  std::vector<bool> in_train(ds.documents.size(), false);
  for (auto& idx : strata) {
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = true;
  }

  Dataset train, test;
  train.name = ds.name + "/train";
  test.name = ds.name + "/test";
  train.labels = ds.labels;
  test.labels = ds.labels;
  for (std::size_t i = 0; i < ds.documents.size(); ++i) {
    (in_train[i] ? train : test).documents.push_back(ds.documents[i]);
  }
  return {std::move(train), std::move(test)};
}

Dataset domain_subset(const Dataset& ds, const std::string& parent) {
  if (!ds.labels.has_parent(parent)) {
    throw DataError("unknown parent label '" + parent + "'");
  }
  Dataset out;
  out.name = ds.name + "/" + parent;
  for (const auto& child : ds.labels.children_of(parent)) {
    out.labels.add_pair(parent, child);
  }
  for (const auto& doc : ds.documents) {
    if (doc.parent_label == parent) out.documents.push_back(doc);
  }
  return out;
}

}  // namespace hdltex
