#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hetnids {

// One row of the cross-domain combination registry: which datasets are
// paired and which feature ids each domain view selects.
struct CrossDomainSpec {
  int sr_id = 0;
  std::vector<std::string> dataset_names;
  std::vector<std::vector<int>> feature_id_lists;
  double subsample_fraction = 1.0;
  std::vector<std::string> notes;  // reading corrections applied to the stored lists
};

// Registry of the 20 predefined cross-domain feature-id combinations
// over CIC17, CIC18, SDN20 and ANDMAL. Rows 1-13 split a single dataset
// into two disjoint feature views; rows 14-19 pair two datasets; row 20
// spans three. Two rows carry corrected readings, flagged in `notes`:
//   - row 6, list 1: "53.70" stored as the ids 53 and 70
//   - row 5, list 2: id 78 (the label column) dropped
inline CrossDomainSpec combination_registry(int sr_id) {
  CrossDomainSpec spec;
  spec.sr_id = sr_id;
  switch (sr_id) {
    case 1:
      spec.dataset_names = {"CIC18", "CIC18"};
      spec.feature_id_lists = {{1, 10, 11, 24, 34, 35, 40, 50, 73, 77}, {9, 37, 52, 62, 65}};
      break;
    case 2:
      spec.dataset_names = {"CIC18", "CIC18"};
      spec.feature_id_lists = {{13, 20, 26, 33, 72}, {3, 7, 25, 37, 64}};
      break;
    case 3:
      spec.dataset_names = {"CIC18", "CIC18"};
      spec.feature_id_lists = {{4, 5, 7, 10, 15, 19, 20, 21, 22, 24, 26, 41, 42, 47, 57},
                               {13, 14, 17, 23, 27, 35, 37, 48, 50, 56, 59, 68, 71, 73, 77}};
      break;
    case 4:
      spec.dataset_names = {"CIC18", "CIC18"};
      spec.feature_id_lists = {{14, 24, 45, 68, 73},
                               {1, 10, 13, 15, 16, 21, 22, 23, 29, 31, 38, 41, 42, 56, 58, 60, 64, 65, 70, 72}};
      break;
    case 5:
      spec.dataset_names = {"CIC18", "CIC18"};
      spec.feature_id_lists = {{1, 2, 3, 5, 8, 13, 17, 19, 20, 21, 25, 31, 39, 40, 42,
                                46, 47, 53, 56, 57, 58, 61, 62, 65, 66, 67, 70, 74, 76, 77},
                               {24, 29, 30, 41, 44}};
      spec.notes = {"list 2: dropped id 78 (label column) from the recorded combination"};
      break;
    case 6:
      spec.dataset_names = {"CIC17", "CIC17"};
      spec.feature_id_lists = {{12, 14, 18, 53, 70}, {10, 22, 30, 54, 73}};
      spec.notes = {"list 1: '53.70' in the recorded combination read as ids 53,70"};
      break;
    case 7:
      spec.dataset_names = {"CIC17", "CIC17"};
      spec.feature_id_lists = {{9, 11, 15, 22, 32, 35, 41, 45, 47, 53, 54, 56, 58, 65, 67},
                               {13, 14, 16, 28, 34, 40, 44, 51, 59, 60, 64, 68, 71, 72, 74}};
      break;
    case 8:
      spec.dataset_names = {"CIC17", "CIC17"};
      spec.feature_id_lists = {{29, 62, 71, 75, 77},
                               {6, 15, 24, 25, 27, 35, 41, 44, 47, 49, 50, 52, 53, 61, 64, 66, 67, 69, 74, 76}};
      break;
    case 9:
      spec.dataset_names = {"CIC17", "CIC17"};
      spec.feature_id_lists = {{1, 2, 3, 4, 5, 6, 7, 15, 16, 18, 20, 22, 23, 24, 25,
                                29, 32, 36, 37, 39, 43, 45, 49, 51, 57, 62, 65, 69, 74, 75},
                               {8, 31, 33, 61, 67}};
      break;
    case 10:
      spec.dataset_names = {"SDN20", "SDN20"};
      spec.feature_id_lists = {{6, 27, 30, 36, 69}, {13, 15, 20, 62, 66}};
      break;
    case 11:
      spec.dataset_names = {"SDN20", "SDN20"};
      spec.feature_id_lists = {{5, 6, 16, 19, 20, 21, 23, 24, 26, 33, 52, 53, 65, 75, 77},
                               {2, 3, 9, 13, 14, 29, 34, 41, 51, 60, 67, 71, 73, 74, 76}};
      break;
    case 12:
      spec.dataset_names = {"SDN20", "SDN20"};
      spec.feature_id_lists = {{2, 31, 35, 70, 73},
                               {1, 11, 12, 14, 15, 16, 17, 18, 20, 24, 28, 33, 44, 50, 54, 56, 66, 69, 71, 77}};
      break;
    case 13:
      spec.dataset_names = {"SDN20", "SDN20"};
      spec.feature_id_lists = {{2, 4, 6, 8, 14, 18, 19, 23, 25, 26, 30, 36, 37, 38, 40,
                                44, 45, 52, 55, 56, 57, 59, 61, 63, 65, 70, 73, 74, 75, 77},
                               {11, 15, 29, 33, 47}};
      break;
    case 14:
      spec.dataset_names = {"CIC17", "CIC18"};
      spec.feature_id_lists = {{5, 12, 15, 25, 33, 51, 64, 66, 67, 77},
                               {11, 17, 26, 29, 31, 32, 37, 45, 56, 73}};
      break;
    case 15:
      spec.dataset_names = {"CIC17", "SDN20"};
      spec.feature_id_lists = {{5, 12, 15, 25, 33, 51, 64, 66, 67, 77},
                               {1, 6, 7, 9, 28, 54, 55, 63, 65, 74}};
      break;
    case 16:
      spec.dataset_names = {"CIC17", "ANDMAL"};
      spec.feature_id_lists = {{5, 12, 15, 25, 33, 51, 64, 66, 67, 77},
                               {4, 22, 35, 42, 43, 46, 48, 50, 69, 71}};
      break;
    case 17:
      spec.dataset_names = {"CIC18", "SDN20"};
      spec.feature_id_lists = {{11, 17, 26, 29, 31, 32, 37, 45, 56, 73},
                               {1, 6, 7, 9, 28, 54, 55, 63, 65, 74}};
      break;
    case 18:
      spec.dataset_names = {"CIC18", "ANDMAL"};
      spec.feature_id_lists = {{11, 17, 26, 29, 31, 32, 37, 45, 56, 73},
                               {4, 22, 35, 42, 43, 46, 48, 50, 69, 71}};
      break;
    case 19:
      spec.dataset_names = {"SDN20", "ANDMAL"};
      spec.feature_id_lists = {{1, 6, 7, 9, 28, 54, 55, 63, 65, 74},
                               {4, 22, 35, 42, 43, 46, 48, 50, 69, 71}};
      break;
    case 20:
      spec.dataset_names = {"CIC17", "CIC18", "SDN20"};
      spec.feature_id_lists = {{1, 3, 7, 10, 18, 26, 38, 48, 54, 55, 56, 68, 69, 71, 75},
                               {6, 7, 9, 10, 15, 16, 19, 21, 22, 27, 37, 40, 46, 48, 58, 70, 74},
                               {8, 10, 15, 17, 21, 34, 38, 51, 55, 56, 59, 63, 67, 69, 73}};
      break;
    default:
      throw std::invalid_argument("unknown combination id " + std::to_string(sr_id) +
                                  " (valid: 1..20)");
  }
  return spec;
}

inline constexpr int kCombinationCount = 20;

}  // namespace hetnids
