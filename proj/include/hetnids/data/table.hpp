#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetnids/matrix.hpp"

namespace hetnids {

// The 77 flow features shared by the supported datasets plus the label
// column. Feature ids are 1-based; id 78 is the label column.
inline constexpr std::array<const char*, 78> kFlowFeatureNames = {
    "Protocol",                    // 1
    "Flow_Duration",               // 2
    "Total_Fwd_Packets",           // 3
    "Total_Backward_Packets",      // 4
    "Total_Length_of_Fwd_Packets", // 5
    "Total_Length_of_Bwd_Packets", // 6
    "Fwd_Packet_Length_Max",       // 7
    "Fwd_Packet_Length_Min",       // 8
    "Fwd_Packet_Length_Mean",      // 9
    "Fwd_Packet_Length_Std",       // 10
    "Bwd_Packet_Length_Max",       // 11
    "Bwd_Packet_Length_Min",       // 12
    "Bwd_Packet_Length_Mean",      // 13
    "Bwd_Packet_Length_Std",       // 14
    "Flow_Bytess",                 // 15
    "Flow_Packetss",               // 16
    "Flow_IAT_Mean",               // 17
    "Flow_IAT_Std",                // 18
    "Flow_IAT_Max",                // 19
    "Flow_IAT_Min",                // 20
    "Fwd_IAT_Total",               // 21
    "Fwd_IAT_Mean",                // 22
    "Fwd_IAT_Std",                 // 23
    "Fwd_IAT_Max",                 // 24
    "Fwd_IAT_Min",                 // 25
    "Bwd_IAT_Total",               // 26
    "Bwd_IAT_Mean",                // 27
    "Bwd_IAT_Std",                 // 28
    "Bwd_IAT_Max",                 // 29
    "Bwd_IAT_Min",                 // 30
    "Fwd_PSH_Flags",               // 31
    "Bwd_PSH_Flags",               // 32
    "Fwd_URG_Flags",               // 33
    "Bwd_URG_Flags",               // 34
    "Fwd_Header_Length_2",         // 35
    "Bwd_Header_Length",           // 36
    "Fwd_Packetss",                // 37
    "Bwd_Packetss",                // 38
    "Min_Packet_Length",           // 39
    "Max_Packet_Length",           // 40
    "Packet_Length_Mean",          // 41
    "Packet_Length_Std",           // 42
    "Packet_Length_Variance",      // 43
    "FIN_Flag_Count",              // 44
    "SYN_Flag_Count",              // 45
    "RST_Flag_Count",              // 46
    "PSH_Flag_Count",              // 47
    "ACK_Flag_Count",              // 48
    "URG_Flag_Count",              // 49
    "CWE_Flag_Count",              // 50
    "ECE_Flag_Count",              // 51
    "DownUp_Ratio",                // 52
    "Average_Packet_Size",         // 53
    "Avg_Fwd_Segment_Size",        // 54
    "Avg_Bwd_Segment_Size",        // 55
    "Fwd_Avg_BytesBulk",           // 56
    "Fwd_Avg_PacketsBulk",         // 57
    "Fwd_Avg_Bulk_Rate",           // 58
    "Bwd_Avg_BytesBulk",           // 59
    "Bwd_Avg_PacketsBulk",         // 60
    "Bwd_Avg_Bulk_Rate",           // 61
    "Subflow_Fwd_Packets",         // 62
    "Subflow_Fwd_Bytes",           // 63
    "Subflow_Bwd_Packets",         // 64
    "Subflow_Bwd_Bytes",           // 65
    "Init_Win_bytes_forward",      // 66
    "Init_Win_bytes_backward",     // 67
    "act_data_pkt_fwd",            // 68
    "min_seg_size_forward",        // 69
    "Active_Mean",                 // 70
    "Active_Std",                  // 71
    "Active_Max",                  // 72
    "Active_Min",                  // 73
    "Idle_Mean",                   // 74
    "Idle_Std",                    // 75
    "Idle_Max",                    // 76
    "Idle_Min",                    // 77
    "multilabel",                  // 78 (label column)
};

inline constexpr int kMaxFeatureId = 77;
inline constexpr const char* kDefaultLabelColumn = "multilabel";

inline std::string flow_feature_name(int id) {
  if (id < 1 || id > 78) throw std::invalid_argument("unknown feature id " + std::to_string(id));
  return kFlowFeatureNames[static_cast<std::size_t>(id - 1)];
}

// A parsed flow CSV. Numeric cells of the feature columns are held
// row-major with NaN marking missing/unparsable/non-finite values; the
// label column is kept as raw text until binarize_labels() rewrites it
// to "0"/"1".
struct RawTable {
  std::vector<std::string> column_names;       // every header cell, label included
  std::size_t label_col = 0;                   // index of the label column in column_names
  std::vector<std::vector<double>> features;   // one row per data row, width = column_names.size()-1
  std::vector<std::string> labels;             // raw (or binarized) label text per row
  bool binarized = false;

  std::size_t row_count() const { return features.size(); }
  std::size_t feature_count() const { return column_names.empty() ? 0 : column_names.size() - 1; }

  // Name of the j-th feature column (the label column is skipped).
  const std::string& feature_column_name(std::size_t j) const {
    return column_names[j < label_col ? j : j + 1];
  }
};

// One domain's view of the data: a finite feature matrix, binary labels
// (0 = NORMAL, 1 = ATTACK) and the feature ids the columns map to.
struct DomainDataset {
  std::string name;
  Matrix features;              // n x d
  std::vector<int> labels;      // n entries in {0, 1}
  std::vector<int> feature_ids; // d distinct ids in 1..77

  int size() const { return features.rows; }
  int dim() const { return features.cols; }
};

inline void validate_dataset(const DomainDataset& ds) {
  if (ds.features.rows != static_cast<int>(ds.labels.size()))
    throw std::invalid_argument("DomainDataset: label count does not match rows");
  if (ds.features.cols != static_cast<int>(ds.feature_ids.size()))
    throw std::invalid_argument("DomainDataset: feature id count does not match columns");
  for (std::size_t i = 0; i < ds.feature_ids.size(); ++i) {
    const int id = ds.feature_ids[i];
    if (id < 1 || id > kMaxFeatureId)
      throw std::invalid_argument("DomainDataset: feature id out of range");
    for (std::size_t j = i + 1; j < ds.feature_ids.size(); ++j) {
      if (ds.feature_ids[j] == id) throw std::invalid_argument("DomainDataset: duplicate feature id");
    }
  }
  for (int label : ds.labels) {
    if (label != 0 && label != 1) throw std::invalid_argument("DomainDataset: labels must be binary");
  }
  if (!all_finite(ds.features)) throw std::invalid_argument("DomainDataset: non-finite feature entry");
}

// Rows of a dataset selected by index, preserving the given order.
inline DomainDataset take_rows(const DomainDataset& ds, const std::vector<int>& idx) {
  DomainDataset out;
  out.name = ds.name;
  out.feature_ids = ds.feature_ids;
  out.features = Matrix(static_cast<int>(idx.size()), ds.features.cols);
  out.labels.resize(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const int src = idx[r];
    const double* in = ds.features.row(src);
    double* dst = out.features.row(static_cast<int>(r));
    for (int c = 0; c < ds.features.cols; ++c) dst[c] = in[c];
    out.labels[r] = ds.labels[static_cast<std::size_t>(src)];
  }
  return out;
}

// FNV-1a over the full content; used to certify that two consumers saw
// byte-identical prepared data.
inline std::uint64_t fnv1a_bytes(const void* ptr, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(ptr);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash_dataset(const DomainDataset& ds, std::uint64_t h = 1469598103934665603ULL) {
  const int shape[2] = {ds.features.rows, ds.features.cols};
  h = fnv1a_bytes(shape, sizeof(shape), h);
  h = fnv1a_bytes(ds.features.data.data(), ds.features.data.size() * sizeof(double), h);
  h = fnv1a_bytes(ds.labels.data(), ds.labels.size() * sizeof(int), h);
  h = fnv1a_bytes(ds.feature_ids.data(), ds.feature_ids.size() * sizeof(int), h);
  return h;
}

}  // namespace hetnids
