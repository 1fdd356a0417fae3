#pragma once

#include <compare>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace revcast {

// Identity of one time series: a (segment, region, product) triple.
struct DatarowKey {
    std::string segment;
    std::string region;
    std::string product;

    auto operator<=>(const DatarowKey&) const = default;
    std::string to_string() const { return segment + "/" + region + "/" + product; }
};

// Quarterly revenue series, contiguous from first_quarter. Values are strictly
// positive; interior gaps are rejected at ingestion.
struct Datarow {
    DatarowKey key;
    int first_quarter = 0;
    std::vector<double> revenue;

    int quarters() const { return static_cast<int>(revenue.size()); }
    int last_quarter() const { return first_quarter + quarters() - 1; }
    bool observed(int q) const { return q >= first_quarter && q <= last_quarter(); }
    double at(int q) const;
    // True when every quarter in [lo, hi] is observed.
    bool covers(int lo, int hi) const { return first_quarter <= lo && last_quarter() >= hi; }
    // Count of observed quarters at or before train_end.
    int history_until(int train_end) const;
};

struct PanelDataset {
    std::vector<Datarow> rows; // sorted by key
    int n_quarters = 39;
    int horizon = 4;
    // Quarter index 0 corresponds to epoch_year-Q<epoch_quarter> at the I/O boundary.
    int epoch_year = 2009;
    int epoch_quarter = 1;
    std::string provenance_hash; // emitted in the artifact header line

    // Index of the last training quarter (first test quarter minus one).
    int train_end_index() const { return n_quarters - horizon - 1; }
    const Datarow* find(const DatarowKey& key) const;
    std::vector<std::string> segments() const;
    std::vector<std::string> regions() const;
    std::vector<std::string> products() const;
    void validate() const;
};

struct EligibilitySplit {
    std::set<DatarowKey> trainable;
    std::set<DatarowKey> out_of_sample;
    int min_history = 15;
};

// Optional mapping from the canonical column names (segment, region, product,
// quarter, revenue) to the names used in the file.
using ColumnSchema = std::map<std::string, std::string>;

PanelDataset load_panel(const std::string& path, const ColumnSchema& schema = {});
void save_panel(const PanelDataset& panel, const std::string& path);

// Canonical CSV bytes as written by save_panel.
std::string render_panel_csv(const PanelDataset& panel);

// Rows are trainable when they have at least min_history contiguous observed
// quarters ending at the last training quarter.
EligibilitySplit split_eligibility(const PanelDataset& panel, int min_history);

std::string quarter_label(const PanelDataset& panel, int quarter_index);

} // namespace revcast
