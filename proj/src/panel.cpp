#include "panel.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "csv.hpp"
#include "errors.hpp"

namespace revcast {

namespace {

struct QuarterLabel {
    int year;
    int quarter; // 1..4
};

QuarterLabel parse_quarter_label(const std::string& text, const std::string& context) {
    // Format: YYYY-Qn
    if (text.size() != 7 || text[4] != '-' || (text[5] != 'Q' && text[5] != 'q')) {
        throw ValidationError(context + ": bad quarter label '" + text + "' (expected YYYY-Qn)");
    }
    const int year = static_cast<int>(csv::parse_long(std::string_view(text).substr(0, 4), context));
    const int q = text[6] - '0';
    if (q < 1 || q > 4) {
        throw ValidationError(context + ": quarter out of range in '" + text + "'");
    }
    return {year, q};
}

std::string render_quarter_label(int epoch_year, int epoch_quarter, int index) {
    const int absolute = (epoch_year * 4 + (epoch_quarter - 1)) + index;
    const int year = absolute / 4;
    const int q = absolute % 4 + 1;
    std::string s = std::to_string(year);
    s += "-Q";
    s += static_cast<char>('0' + q);
    return s;
}

std::vector<std::string> unique_labels(const std::vector<Datarow>& rows,
                                       const std::string DatarowKey::* field) {
    std::set<std::string> seen;
    for (const auto& row : rows) seen.insert(row.key.*field);
    return {seen.begin(), seen.end()};
}

} // namespace

double Datarow::at(int q) const {
    if (!observed(q)) {
        throw ValidationError("datarow " + key.to_string() + ": quarter " + std::to_string(q) +
                              " not observed");
    }
    return revenue[static_cast<std::size_t>(q - first_quarter)];
}

int Datarow::history_until(int train_end) const {
    if (train_end < first_quarter) return 0;
    return std::min(train_end, last_quarter()) - first_quarter + 1;
}

const Datarow* PanelDataset::find(const DatarowKey& key) const {
    const auto it = std::lower_bound(rows.begin(), rows.end(), key,
                                     [](const Datarow& r, const DatarowKey& k) { return r.key < k; });
    if (it == rows.end() || it->key != key) return nullptr;
    return &*it;
}

std::vector<std::string> PanelDataset::segments() const {
    return unique_labels(rows, &DatarowKey::segment);
}
std::vector<std::string> PanelDataset::regions() const {
    return unique_labels(rows, &DatarowKey::region);
}
std::vector<std::string> PanelDataset::products() const {
    return unique_labels(rows, &DatarowKey::product);
}

void PanelDataset::validate() const {
    if (horizon >= n_quarters) {
        throw ValidationError("panel: horizon must be smaller than n_quarters");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Datarow& row = rows[i];
        if (row.key.segment.empty() || row.key.region.empty() || row.key.product.empty()) {
            throw ValidationError("panel: empty key label in row " + row.key.to_string());
        }
        if (row.revenue.empty()) {
            throw ValidationError("panel: row " + row.key.to_string() + " has no values");
        }
        if (row.first_quarter < 0 || row.last_quarter() >= n_quarters) {
            throw ValidationError("panel: row " + row.key.to_string() +
                                  " extends beyond n_quarters=" + std::to_string(n_quarters));
        }
        for (const double v : row.revenue) {
            if (!(v > 0.0)) {
                throw ValidationError("panel: row " + row.key.to_string() +
                                      " has a non-positive revenue value");
            }
        }
        if (i > 0 && !(rows[i - 1].key < row.key)) {
            throw ValidationError("panel: rows not sorted/unique at " + row.key.to_string());
        }
    }
}

PanelDataset load_panel(const std::string& path, const ColumnSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open panel file: " + path);

    std::string line;
    std::map<std::string, std::string> header_meta;
    // Optional artifact header comment, then the column header row.
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    if (!line.empty() && line[0] == '#') {
        header_meta = csv::parse_header_comment(line);
        if (!std::getline(in, line)) throw ValidationError(path + ": missing column header");
    }

    const auto columns = csv::split_line(line);
    auto resolve = [&](const std::string& standard) {
        const auto it = schema.find(standard);
        const std::string& name = it == schema.end() ? standard : it->second;
        const auto pos = std::find(columns.begin(), columns.end(), name);
        if (pos == columns.end()) {
            throw ValidationError(path + ": missing required column '" + name + "'");
        }
        return static_cast<std::size_t>(pos - columns.begin());
    };
    const std::size_t c_segment = resolve("segment");
    const std::size_t c_region = resolve("region");
    const std::size_t c_product = resolve("product");
    const std::size_t c_quarter = resolve("quarter");
    const std::size_t c_revenue = resolve("revenue");

    struct RawValue {
        int year;
        int quarter;
        double revenue;
        std::size_t line_no;
    };
    std::map<DatarowKey, std::vector<RawValue>> raw;
    std::vector<std::string> bad_revenue;
    int min_abs_quarter = std::numeric_limits<int>::max();
    int max_abs_quarter = std::numeric_limits<int>::min();

    std::size_t line_no = header_meta.empty() ? 1 : 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != columns.size()) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(columns.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        }
        const std::string context = path + ":" + std::to_string(line_no);
        DatarowKey key{fields[c_segment], fields[c_region], fields[c_product]};
        if (key.segment.empty() || key.region.empty() || key.product.empty()) {
            throw ValidationError(context + ": empty key label");
        }
        const QuarterLabel q = parse_quarter_label(fields[c_quarter], context);
        const double value = csv::parse_double(fields[c_revenue], context);
        if (!(value > 0.0)) {
            bad_revenue.push_back(key.to_string() + " @ " + fields[c_quarter] + " = " +
                                  fields[c_revenue]);
            continue;
        }
        const int abs_q = q.year * 4 + (q.quarter - 1);
        min_abs_quarter = std::min(min_abs_quarter, abs_q);
        max_abs_quarter = std::max(max_abs_quarter, abs_q);
        raw[key].push_back({q.year, q.quarter, value, line_no});
    }

    if (!bad_revenue.empty()) {
        std::string msg = path + ": non-positive revenue rejected for " +
                          std::to_string(bad_revenue.size()) + " row(s):";
        const std::size_t shown = std::min<std::size_t>(bad_revenue.size(), 20);
        for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + bad_revenue[i];
        if (shown < bad_revenue.size()) {
            msg += "\n  ... and " + std::to_string(bad_revenue.size() - shown) + " more";
        }
        throw ValidationError(msg);
    }
    if (raw.empty()) throw ValidationError(path + ": no data rows");

    PanelDataset panel;
    // Epoch from the header when present, else the earliest label in the file.
    if (const auto it = header_meta.find("epoch"); it != header_meta.end()) {
        const QuarterLabel e = parse_quarter_label(it->second, path + " header");
        panel.epoch_year = e.year;
        panel.epoch_quarter = e.quarter;
    } else {
        panel.epoch_year = min_abs_quarter / 4;
        panel.epoch_quarter = min_abs_quarter % 4 + 1;
    }
    const int epoch_abs = panel.epoch_year * 4 + (panel.epoch_quarter - 1);

    if (const auto it = header_meta.find("n_quarters"); it != header_meta.end()) {
        panel.n_quarters = static_cast<int>(csv::parse_long(it->second, path + " header"));
    } else {
        panel.n_quarters = max_abs_quarter - epoch_abs + 1;
    }
    if (const auto it = header_meta.find("horizon"); it != header_meta.end()) {
        panel.horizon = static_cast<int>(csv::parse_long(it->second, path + " header"));
    } else {
        panel.horizon = std::min(panel.horizon, panel.n_quarters - 1);
    }
    if (const auto it = header_meta.find("config_hash"); it != header_meta.end()) {
        panel.provenance_hash = it->second;
    }

    for (auto& [key, values] : raw) {
        std::sort(values.begin(), values.end(), [](const RawValue& a, const RawValue& b) {
            return a.year * 4 + a.quarter < b.year * 4 + b.quarter;
        });
        Datarow row;
        row.key = key;
        row.first_quarter = values.front().year * 4 + (values.front().quarter - 1) - epoch_abs;
        if (row.first_quarter < 0) {
            throw ValidationError(path + ": row " + key.to_string() +
                                  " starts before the panel epoch");
        }
        int expected = row.first_quarter;
        for (const RawValue& v : values) {
            const int idx = v.year * 4 + (v.quarter - 1) - epoch_abs;
            if (idx < expected) {
                throw ValidationError(path + ":" + std::to_string(v.line_no) +
                                      ": duplicate quarter for " + key.to_string());
            }
            if (idx > expected) {
                throw ValidationError(path + ": row " + key.to_string() +
                                      " has an interior gap before quarter index " +
                                      std::to_string(idx) + "; series must be contiguous");
            }
            row.revenue.push_back(v.revenue);
            ++expected;
        }
        panel.rows.push_back(std::move(row));
    }

    if (panel.provenance_hash.empty()) {
        std::string body;
        for (const auto& row : panel.rows) {
            body += row.key.to_string();
            for (const double v : row.revenue) body += "," + csv::format_double(v);
            body += "\n";
        }
        panel.provenance_hash = csv::hash_hex(csv::fnv1a(body));
    }
    panel.validate();
    return panel;
}

std::string render_panel_csv(const PanelDataset& panel) {
    std::string out = csv::render_header_comment({
        {"config_hash", panel.provenance_hash},
        {"n_quarters", std::to_string(panel.n_quarters)},
        {"horizon", std::to_string(panel.horizon)},
        {"epoch", render_quarter_label(panel.epoch_year, panel.epoch_quarter, 0)},
    });
    out += "\nsegment,region,product,quarter,revenue\n";
    for (const auto& row : panel.rows) {
        for (int i = 0; i < row.quarters(); ++i) {
            out += row.key.segment;
            out += ',';
            out += row.key.region;
            out += ',';
            out += row.key.product;
            out += ',';
            out += render_quarter_label(panel.epoch_year, panel.epoch_quarter,
                                        row.first_quarter + i);
            out += ',';
            out += csv::format_double(row.revenue[static_cast<std::size_t>(i)]);
            out += '\n';
        }
    }
    return out;
}

void save_panel(const PanelDataset& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write panel file: " + path);
    out << render_panel_csv(panel);
    if (!out) throw IoError("write failed: " + path);
}

EligibilitySplit split_eligibility(const PanelDataset& panel, int min_history) {
    if (min_history < 1) throw ValidationError("split_eligibility: min_history must be >= 1");
    EligibilitySplit split;
    split.min_history = min_history;
    const int train_end = panel.train_end_index();
    for (const auto& row : panel.rows) {
        const bool ok = row.last_quarter() >= train_end &&
                        row.first_quarter <= train_end - min_history + 1;
        (ok ? split.trainable : split.out_of_sample).insert(row.key);
    }
    return split;
}

std::string quarter_label(const PanelDataset& panel, int quarter_index) {
    return render_quarter_label(panel.epoch_year, panel.epoch_quarter, quarter_index);
}

} // namespace revcast
