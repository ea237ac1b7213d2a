#include "tumorkit/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "tumorkit/csv.hpp"
#include "tumorkit/error.hpp"
#include "tumorkit/image_io.hpp"
#include "tumorkit/random.hpp"

namespace tumorkit {

ClassLabel parse_label(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "meningioma") return ClassLabel::Meningioma;
  if (lower == "glioma") return ClassLabel::Glioma;
  if (lower == "pituitary") return ClassLabel::Pituitary;
  if (lower == "negative") return ClassLabel::Negative;
  throw InvalidArgument("unknown label '" + std::string(text) + "'");
}

std::string_view label_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::Meningioma: return "meningioma";
    case ClassLabel::Glioma: return "glioma";
    case ClassLabel::Pituitary: return "pituitary";
    case ClassLabel::Negative: return "negative";
  }
  return "?";
}

const ManifestEntry& DatasetManifest::find(std::string_view id) const {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
  if (it == entries.end()) throw InvalidArgument("unknown sample id '" + std::string(id) + "'");
  return *it;
}

bool DatasetManifest::contains(std::string_view id) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.id == id; });
}

std::vector<std::string> DatasetManifest::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.id);
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("split: train_fraction must lie in (0,1)");
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("manifest not found: " + path.string());
  const csv::Table table = csv::read_file(path);
  DatasetManifest manifest;
  manifest.root = path.parent_path();
  if (table.rows.empty()) return manifest;
  if (csv::join(table.rows[0]) != kManifestHeader) {
    throw ParseError(table.line_numbers[0], "manifest header must be '" +
                                                std::string(kManifestHeader) + "'");
  }
  std::set<std::string> seen;
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    if (row.size() != 5) {
      throw ParseError(line, "expected 5 fields, found " + std::to_string(row.size()));
    }
    if (row[0].empty()) throw ParseError(line, "missing field 'id'");
    if (row[1].empty()) throw ParseError(line, "missing field 'image'");
    if (row[3].empty()) throw ParseError(line, "missing field 'label'");
    if (!seen.insert(row[0]).second) throw ParseError(line, "duplicate id '" + row[0] + "'");
    ManifestEntry e;
    e.id = row[0];
    e.image = row[1];
    if (!row[2].empty()) e.mask = std::filesystem::path(row[2]);
    try {
      e.label = parse_label(row[3]);
    } catch (const InvalidArgument& err) {
      throw ParseError(line, err.what());
    }
    e.patient = row[4];
    for (const auto* p : {&e.image, e.mask ? &*e.mask : nullptr}) {
      if (p && !std::filesystem::exists(p->is_absolute() ? *p : manifest.root / *p)) {
        throw ParseError(line, "file not found: " + p->generic_string());
      }
    }
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kManifestHeader << '\n';
  for (const auto& e : manifest.entries) {
    out << csv::join({e.id, e.image.generic_string(), e.mask ? e.mask->generic_string() : "",
                      std::string(label_name(e.label)), e.patient})
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

LabeledSample load_sample(const DatasetManifest& manifest, std::string_view id) {
  const ManifestEntry& e = manifest.find(id);
  auto resolve = [&](const std::filesystem::path& p) { return p.is_absolute() ? p : manifest.root / p; };
  LabeledSample s;
  s.id = e.id;
  s.label = e.label;
  s.patient = e.patient;
  s.image = read_image(resolve(e.image));
  if (e.mask) {
    BinaryMask mask = read_mask(resolve(*e.mask));
    if (mask.width() != s.image.width() || mask.height() != s.image.height()) {
      throw ShapeError("sample '" + e.id + "': mask is " + std::to_string(mask.width()) + "x" +
                       std::to_string(mask.height()) + " but image is " +
                       std::to_string(s.image.width()) + "x" + std::to_string(s.image.height()));
    }
    s.mask = std::move(mask);
  }
  return s;
}

Split split(const DatasetManifest& manifest, const SplitSpec& spec) {
  spec.validate();
  // Strata hold manifest indices in manifest order.
  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const int key = spec.stratify_by_label ? static_cast<int>(manifest.entries[i].label) : 0;
    strata[key].push_back(i);
  }
  std::vector<bool> in_train(manifest.entries.size(), false);
  for (auto& [key, members] : strata) {
    if (spec.stratify_by_label && members.size() < 2) {
      throw InvalidArgument("split: stratum '" +
                            std::string(label_name(static_cast<ClassLabel>(key))) +
                            "' has fewer than 2 samples");
    }
    Rng rng = make_rng(derive_seed(spec.seed, "split", static_cast<std::uint64_t>(key)));
    std::shuffle(members.begin(), members.end(), rng);
    // The epsilon keeps exact halves (e.g. 5 * 0.7) rounding up despite
    // binary representation error.
    const double want = static_cast<double>(members.size()) * spec.train_fraction + 0.5 + 1e-9;
    const auto n_train = std::min(members.size(), static_cast<std::size_t>(std::floor(want)));
    for (std::size_t j = 0; j < n_train; ++j) in_train[members[j]] = true;
  }
  Split out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    (in_train[i] ? out.train : out.test).push_back(manifest.entries[i].id);
  }
  return out;
}

}  // namespace tumorkit
