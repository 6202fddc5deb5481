#include "vqc/fetch.hpp"

#include "vqc/sha256.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <zlib.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vqc {

namespace {

bool is_number(const std::string &tok) {
    if (tok.empty()) return false;
    char *end = nullptr;
    std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

std::string join_csv_row(const std::vector<std::string> &cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

std::string header_row(const ManifestEntry &m) { return join_csv_row(m.columns); }

std::string http_get(const std::string &url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw DataError("malformed URL: " + url);
    const auto host_start = scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client cli(origin);
    cli.set_follow_location(true);
    cli.set_connection_timeout(20, 0);
    cli.set_read_timeout(60, 0);
    auto res = cli.Get(path);
    if (!res) throw DataError("download failed for " + url + " (no response)");
    if (res->status != 200)
        throw DataError("download failed for " + url + " (HTTP " +
                        std::to_string(res->status) + ")");
    return res->body;
}

std::string inflate_raw(const std::string &in, std::size_t expected_out) {
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw DataError("zlib init failed");
    std::string out;
    out.resize(std::max<std::size_t>(expected_out, 1 << 16));
    zs.next_in = reinterpret_cast<Bytef *>(const_cast<char *>(in.data()));
    zs.avail_in = uInt(in.size());
    zs.next_out = reinterpret_cast<Bytef *>(out.data());
    zs.avail_out = uInt(out.size());
    int rc;
    while ((rc = inflate(&zs, Z_NO_FLUSH)) == Z_OK) {
        if (zs.avail_out == 0) {
            const std::size_t used = out.size();
            out.resize(out.size() * 2);
            zs.next_out = reinterpret_cast<Bytef *>(out.data() + used);
            zs.avail_out = uInt(out.size() - used);
        }
    }
    const bool ok = rc == Z_STREAM_END;
    out.resize(zs.total_out);
    inflateEnd(&zs);
    if (!ok) throw DataError("zlib inflate failed");
    return out;
}

std::uint32_t le32(const std::string &s, std::size_t off) {
    return std::uint32_t(std::uint8_t(s[off])) | std::uint32_t(std::uint8_t(s[off + 1])) << 8 |
           std::uint32_t(std::uint8_t(s[off + 2])) << 16 |
           std::uint32_t(std::uint8_t(s[off + 3])) << 24;
}

std::uint16_t le16(const std::string &s, std::size_t off) {
    return std::uint16_t(std::uint8_t(s[off])) |
           std::uint16_t(std::uint16_t(std::uint8_t(s[off + 1])) << 8);
}

} // namespace

std::string zip_extract(const std::string &archive, const std::string &entry_name) {
    std::size_t off = 0;
    while (off + 30 <= archive.size()) {
        if (le32(archive, off) != 0x04034b50u) break; // end of local headers
        const std::uint16_t method = le16(archive, off + 8);
        const std::uint32_t comp_size = le32(archive, off + 18);
        const std::uint32_t uncomp_size = le32(archive, off + 22);
        const std::uint16_t name_len = le16(archive, off + 26);
        const std::uint16_t extra_len = le16(archive, off + 28);
        const std::string name = archive.substr(off + 30, name_len);
        const std::size_t data_off = off + 30 + name_len + extra_len;
        if (name == entry_name) {
            const std::string blob = archive.substr(data_off, comp_size);
            if (method == 0) return blob;
            if (method == 8) return inflate_raw(blob, uncomp_size);
            throw DataError("zip entry '" + entry_name + "' uses unsupported method");
        }
        off = data_off + comp_size;
    }
    throw DataError("zip entry '" + entry_name + "' not found in archive");
}

std::string normalize_statlib_boston(const std::string &raw, const ManifestEntry &entry) {
    // prose header followed by the data block: take the trailing run of
    // numeric whitespace-separated tokens, expect 506 x 14 values
    std::vector<std::string> tokens;
    std::stringstream ss(raw);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    std::size_t start = tokens.size();
    while (start > 0 && is_number(tokens[start - 1])) --start;
    const std::size_t need = std::size_t(entry.rows) * entry.columns.size();
    if (tokens.size() - start != need)
        throw DataError("statlib boston: expected " + std::to_string(need) +
                        " numeric values, found " + std::to_string(tokens.size() - start));
    std::string out = header_row(entry);
    for (int r = 0; r < entry.rows; ++r) {
        std::vector<std::string> cells(entry.columns.size());
        for (std::size_t c = 0; c < entry.columns.size(); ++c)
            cells[c] = tokens[start + std::size_t(r) * entry.columns.size() + c];
        out += join_csv_row(cells);
    }
    return out;
}

std::string normalize_sklearn_boston_csv(const std::string &raw, const ManifestEntry &entry) {
    // first line "506,13", second line original header, then data rows
    const auto rows = parse_csv(raw, ',');
    if (rows.size() < 3) throw DataError("sklearn boston csv: too few rows");
    std::string out = header_row(entry);
    for (std::size_t r = 2; r < rows.size(); ++r) {
        if (rows[r].size() != entry.columns.size())
            throw DataError("sklearn boston csv: ragged row " + std::to_string(r));
        out += join_csv_row(rows[r]);
    }
    return out;
}

std::string normalize_semicolon_csv(const std::string &raw, const ManifestEntry &entry) {
    const auto rows = parse_csv(raw, ';');
    if (rows.empty()) throw DataError("semicolon csv: empty file");
    if (rows[0].size() != entry.columns.size())
        throw DataError("semicolon csv: expected " + std::to_string(entry.columns.size()) +
                        " columns, found " + std::to_string(rows[0].size()));
    std::string out = header_row(entry);
    for (std::size_t r = 1; r < rows.size(); ++r) out += join_csv_row(rows[r]);
    return out;
}

std::string normalize_cal_housing(const std::string &raw_zip, const ManifestEntry &entry) {
    // StatLib houses.zip: cal_housing.data holds longitude, latitude,
    // housingMedianAge, totalRooms, totalBedrooms, population, households,
    // medianIncome, medianHouseValue -- derive the 8 standard features and
    // the target in 100k units
    const std::string data = zip_extract(raw_zip, "cal_housing.data");
    const auto rows = parse_csv(data, ',');
    std::string out = header_row(entry);
    char buf[512];
    for (const auto &r : rows) {
        if (r.size() != 9)
            throw DataError("cal_housing.data: expected 9 columns, found " +
                            std::to_string(r.size()));
        const double longitude = std::stod(r[0]), latitude = std::stod(r[1]);
        const double age = std::stod(r[2]), rooms = std::stod(r[3]);
        const double bedrooms = std::stod(r[4]), population = std::stod(r[5]);
        const double households = std::stod(r[6]), income = std::stod(r[7]);
        const double value = std::stod(r[8]);
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      income, age, rooms / households, bedrooms / households, population,
                      population / households, latitude, longitude, value / 100000.0);
        out += buf;
    }
    return out;
}

std::string combine_wine_rw(const std::string &red_csv, const std::string &white_csv,
                            const ManifestEntry &entry) {
    // 11 physicochemical features + is_red flag, then quality
    auto append = [&](const std::string &raw, const char *flag, std::string &out) {
        const auto rows = parse_csv(raw, ';');
        if (rows.empty() || rows[0].size() != 12)
            throw DataError("wine csv: expected 12 semicolon-separated columns");
        for (std::size_t r = 1; r < rows.size(); ++r) {
            std::vector<std::string> cells(rows[r].begin(), rows[r].end() - 1);
            cells.push_back(flag);
            cells.push_back(rows[r].back()); // quality
            out += join_csv_row(cells);
        }
    };
    std::string out = header_row(entry);
    append(red_csv, "1", out);
    append(white_csv, "0", out);
    return out;
}

std::string fetch_dataset(const ManifestEntry &entry, const std::string &data_dir) {
    std::string normalized;
    std::string last_error = "no sources listed";
    if (!entry.sources.empty() && entry.sources.front().format == "wine-combined") {
        if (entry.sources.size() != 2)
            throw DataError("wine-combined needs exactly 2 sources (red, white)");
        normalized = combine_wine_rw(http_get(entry.sources[0].url),
                                     http_get(entry.sources[1].url), entry);
    } else {
        bool ok = false;
        for (const ManifestSource &src : entry.sources) {
            try {
                const std::string raw = http_get(src.url);
                if (src.format == "csv") {
                    const auto rows = parse_csv(raw, ',');
                    if (rows.empty()) throw DataError("empty download");
                    normalized = header_row(entry);
                    for (std::size_t r = 1; r < rows.size(); ++r)
                        normalized += join_csv_row(rows[r]);
                } else if (src.format == "csv-semicolon") {
                    normalized = normalize_semicolon_csv(raw, entry);
                } else if (src.format == "boston-statlib") {
                    normalized = normalize_statlib_boston(raw, entry);
                } else if (src.format == "boston-sklearn-csv") {
                    normalized = normalize_sklearn_boston_csv(raw, entry);
                } else if (src.format == "cal-housing-zip") {
                    normalized = normalize_cal_housing(raw, entry);
                } else {
                    throw DataError("unknown manifest format '" + src.format + "'");
                }
                ok = true;
                break;
            } catch (const std::exception &e) {
                last_error = e.what();
                std::fprintf(stderr, "fetch: %s failed: %s\n", src.url.c_str(), e.what());
            }
        }
        if (!ok) throw DataError("all mirrors failed for " + entry.name + ": " + last_error);
    }

    // validate normalized shape before writing
    const auto rows = parse_csv(normalized, ',');
    if (int(rows.size()) - 1 != entry.rows)
        throw DataError(entry.name + ": normalized row count " +
                        std::to_string(rows.size() - 1) + " != manifest " +
                        std::to_string(entry.rows));
    for (const auto &r : rows)
        if (r.size() != entry.columns.size())
            throw DataError(entry.name + ": normalized column count mismatch");

    std::filesystem::create_directories(data_dir);
    const std::string path = data_dir + "/" + entry.file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << normalized;
    out.close();
    return sha256_hex(normalized);
}

int fetch_all(const std::string &manifest_path, const std::string &data_dir, bool pin) {
    auto entries = load_manifest(manifest_path);
    bool manifest_dirty = false;
    int failures = 0;
    for (ManifestEntry &m : entries) {
        const std::string path = data_dir + "/" + m.file;
        if (std::filesystem::exists(path) && !m.sha256.empty() &&
            sha256_file(path) == m.sha256) {
            std::fprintf(stderr, "fetch: %s up to date\n", m.name.c_str());
            continue;
        }
        try {
            const std::string sha = fetch_dataset(m, data_dir);
            if (!m.sha256.empty() && m.sha256 != sha) {
                std::fprintf(stderr, "fetch: %s checksum mismatch (manifest %s, got %s)\n",
                             m.name.c_str(), m.sha256.c_str(), sha.c_str());
                ++failures;
                continue;
            }
            if (m.sha256.empty() && pin) {
                m.sha256 = sha;
                manifest_dirty = true;
            }
            std::fprintf(stderr, "fetch: %s ok (%s)\n", m.name.c_str(), sha.c_str());
        } catch (const std::exception &e) {
            std::fprintf(stderr, "fetch: %s failed: %s\n", m.name.c_str(), e.what());
            ++failures;
        }
    }
    if (manifest_dirty) save_manifest(manifest_path, entries);
    return failures;
}

} // namespace vqc
