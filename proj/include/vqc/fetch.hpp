#pragma once

#include "vqc/data.hpp"

#include <string>
#include <vector>

namespace vqc {

/// Download one dataset snapshot from its canonical mirrors, normalize it
/// to the manifest's CSV schema, validate, and write it under data_dir.
/// Returns the SHA-256 of the written snapshot.
std::string fetch_dataset(const ManifestEntry &entry, const std::string &data_dir);

/// Fetch every manifest entry missing or failing its checksum. When `pin`
/// is set, freshly computed checksums are written back into the manifest
/// for entries that had none.
int fetch_all(const std::string &manifest_path, const std::string &data_dir, bool pin);

/// Normalizers (exposed for tests; they consume raw downloaded bytes).
std::string normalize_statlib_boston(const std::string &raw, const ManifestEntry &entry);
std::string normalize_sklearn_boston_csv(const std::string &raw, const ManifestEntry &entry);
std::string normalize_semicolon_csv(const std::string &raw, const ManifestEntry &entry);
std::string normalize_cal_housing(const std::string &raw_zip, const ManifestEntry &entry);
std::string combine_wine_rw(const std::string &red_csv, const std::string &white_csv,
                            const ManifestEntry &entry);

/// Extract one file from a ZIP archive byte buffer (stored or deflate).
std::string zip_extract(const std::string &archive, const std::string &entry_name);

} // namespace vqc
