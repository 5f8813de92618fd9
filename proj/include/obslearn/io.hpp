#ifndef OBSLEARN_IO_HPP
#define OBSLEARN_IO_HPP

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "obslearn/clockham.hpp"
#include "obslearn/concepts.hpp"
#include "obslearn/kitaev.hpp"
#include "obslearn/learners.hpp"

namespace obslearn {

using json = nlohmann::json;

/// JSON-lines dataset: header record {"meta": {...}} then one
/// {"x": bitstring, "y": value} per line. Byte-deterministic for a fixed
/// dataset (sorted keys, shortest round-trip numbers).
void save_dataset(std::ostream& out, const Dataset& ds);
void save_dataset_file(const std::string& path, const Dataset& ds);
Dataset load_dataset(std::istream& in);
Dataset load_dataset_file(const std::string& path);

/// Model file: single JSON object with basis labels, weights, budget and
/// training diagnostics.
json model_to_json(const LassoModel& model, const std::vector<std::string>&
                   basis_labels);
void save_model_file(const std::string& path, const LassoModel& model,
                     const std::vector<std::string>& basis_labels);
/// Returns the model and the stored basis labels.
std::pair<LassoModel, std::vector<std::string>> load_model_file(
    const std::string& path);

/// Flipped samples: header {"meta": {...}} then {"alpha": [...], "y": v}.
void save_flipped(std::ostream& out, const FlippedSampleSet& s);
FlippedSampleSet load_flipped(std::istream& in);
void save_flipped_file(const std::string& path, const FlippedSampleSet& s);
FlippedSampleSet load_flipped_file(const std::string& path);

json transfer_report_json(const TransferReport& r);
json ground_report_json(const GroundReport& r);

/// Strict file open helpers (ParseError with the path on failure).
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

}  // namespace obslearn

#endif
