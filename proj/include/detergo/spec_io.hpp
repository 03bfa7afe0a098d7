#pragma once

// JSON documents describing weight sequences and index sequences.
//
//   {"type":"qmult","q":2,"r":3,"skeleton":{"preperiod":[],"period":[[0,1]]}}
//   {"type":"thue_morse"}
//   {"type":"rudin_shapiro","t":"1/2"}          (string = exact rational, number = real)
//   {"type":"gtm","r":3,"blocks":[[0,1]]}
//   {"type":"substitution","r":3,"images":{"0":[0,1],"1":[1,2],"2":[2,0]},"seed":0}
//   {"type":"constant","c":1}  {"type":"iid_rademacher","seed":7}
//
// Optional modifiers on any weight document, applied in this order:
//   "power": a,  "shift": {"beta":"log"} | {"beta":"pow","gamma":0.5} |
//   {"beta":"table","values":[...]},  "split": "plus" | "minus".
//
// Index documents: {"type":"identity"|"squares"|"log_shift"},
//   {"type":"polynomial","coeffs":[c0,c1,...]},
//   {"type":"beta_shift","base":{...},"beta":"pow","gamma":0.5}.

#include <optional>
#include <string>

#include "detergo/seqcore.hpp"
#include "json.hpp"

namespace detergo {

using json = nlohmann::json;

WeightSequence parse_weight_spec(const json& doc);
IndexSequence parse_index_spec(const json& doc);
Beta parse_beta_spec(const json& doc);

/// The q-multiplicative sequence a weight document denotes, if it is one
/// without modifiers (qmult, thue_morse, constant-length gtm).
std::optional<QMultSeq> qmult_from_spec(const json& doc);

SkeletonSpec thue_morse_skeleton();
json skeleton_to_json(const SkeletonSpec& spec);

/// Interprets a command-line argument as a named shorthand ("thue_morse",
/// "rudin_shapiro", "ones", "identity", "squares", "log_shift"), an inline
/// JSON document, or a path to a JSON file.
json resolve_spec_argument(const std::string& arg);

}  // namespace detergo
