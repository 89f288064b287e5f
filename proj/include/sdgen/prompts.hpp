#pragma once

#include <string>
#include <string_view>

#include "sdgen/generation.hpp"

namespace sdgen {

inline constexpr std::string_view kPromptTemplateVersion = "v1";

/// System/user halves of one backend call.
struct Prompt {
    std::string system;
    std::string user;
};

/// Byte-exact contents of the versioned template assets. The unit tests
/// assert these equal assets/prompt_template_v1.txt and
/// assets/judge_template_v1.txt so the binary never needs file access.
std::string_view generation_template_text();
std::string_view judge_template_text();

/// Splits a template asset into its sections. The asset starts with a
/// "system:" marker line; the first subsequent line that is exactly "user:"
/// separates the halves. Slot placeholders ({constraints}, {data}, ...)
/// survive verbatim.
Prompt parse_template(std::string_view asset_text);

/// Instantiates the generation template for one request. Slot rules:
///   {constraints}              request.constraints_text, "(none)" when empty
///   {data_generation_signals}  request.signals_text; the slot's whole line
///                              is dropped when empty
///   {number_of_data_points}    request.row_count
///   {col_names}                ledger paths joined ", "
///   {user_input}               request.user_input
///   {proto_description}        request.proto_description
/// A retry (attempt > 1) appends "\n\nPrevious attempt failed validation: "
/// plus the prior report text to the user half. Byte-identical output for
/// identical requests.
Prompt build_prompt(const GenerationRequest& request);

/// Instantiates the judge template: {data} takes the rows rendered as JSON,
/// {constraints} the rendered constraint text.
Prompt build_judge_prompt(std::string_view data_json, std::string_view constraints_text);

/// Renders the schema slice a request covers, proto-style, annotations
/// inlined as comments: the target message restricted to in-scope fields,
/// every nested message reached by a scope path, and every enum an in-scope
/// leaf uses. Deprecated direct fields of touched messages appear with a
/// [deprecated = true] option so the template's "ignore deprecated"
/// instruction has a referent.
std::string render_proto_description(const SchemaSet& set, const SchemaDef& root,
                                     const std::vector<ColumnPath>& columns);

inline constexpr std::string_view kRetryPrefix = "Previous attempt failed validation: ";

}  // namespace sdgen
