#include "sdgen/prompts.hpp"

#include <map>
#include <set>
#include <vector>

#include "sdgen/common.hpp"

namespace sdgen {

namespace {

// Keep byte-identical to assets/prompt_template_v1.txt (test-enforced).
constexpr std::string_view kGenerationTemplate = R"TPL(system:
You are a GoogleSQL expert. GoogleSQL is a Google internal implementation of the SQL query language. Given a proto description, generate sample data in textproto format.

Use only the proto names present in the proto files. Do not create columns that do not exist. Check if the columns match with the proto description.

Instructions for generating sample data:
- Pay careful attention to the datatypes in the proto columns.
- Don't make up the proto field names.
- Carefully match the proto field names to their data types.
- Don't repeat the fields more than once.
- Ignore any deprecated fields in the proto.
- Generate the nested proto fields in the proto file.

Instructions for specific columns in the given schema:
{constraints}

Here are the steps that each question should follow:
1. Generate the proto column name only if present in the proto file.
2. If you have already generated data for a field, please move to the next field.
3. Generate non-zero values for every numeric field.
{data_generation_signals}
user:
Task: Given the following proto description, generate  {number_of_data_points} rows of sample data for {col_names} columns. {user_input}

Proto/schema Description:
{proto_description}
)TPL";

// Keep byte-identical to assets/judge_template_v1.txt (test-enforced).
constexpr std::string_view kJudgeTemplate = R"TPL(system:
You are a GoogleSQL expert. GoogleSQL is a Google internal implementation of the SQL query language. Given data in json format and constrains for particular columns in data, validate the data.

Instructions for validation:
1. Check the values required for a column under the constraints section.
2. Check for the same column in the data section.
3. If the column is not present, please return NOT PRESENT.
4. If the columns is present, please check if the data is present in the constraint for that column.
5. If point 4 is satisfied, please print VALID.
6. If point 4 is not satisfied, please print NOT VALID.
user:
Task:
Given the following Data and Constraints, validate the data and return one of VALID, NOT VALID, NOT PRESENT.

Data:
{data}

Constraints:
{constraints}
)TPL";

const Prompt& generation_sections() {
    static const Prompt p = parse_template(kGenerationTemplate);
    return p;
}

const Prompt& judge_sections() {
    static const Prompt p = parse_template(kJudgeTemplate);
    return p;
}

void append_comment(std::string& out, const std::string& text, std::string_view indent) {
    if (text.empty()) return;
    for (const auto& line : split(text, '\n')) {
        out += indent;
        out += "// ";
        out += line;
        out += '\n';
    }
}

}  // namespace

std::string_view generation_template_text() { return kGenerationTemplate; }
std::string_view judge_template_text() { return kJudgeTemplate; }

Prompt parse_template(std::string_view asset_text) {
    constexpr std::string_view head = "system:\n";
    constexpr std::string_view sep = "\nuser:\n";
    if (asset_text.substr(0, head.size()) != head)
        throw Error("prompt template must start with a 'system:' line");
    size_t mark = asset_text.find(sep, head.size());
    if (mark == std::string_view::npos)
        throw Error("prompt template has no 'user:' section line");
    Prompt p;
    p.system = std::string(asset_text.substr(head.size(), mark - head.size()));
    std::string_view user = asset_text.substr(mark + sep.size());
    if (!user.empty() && user.back() == '\n') user.remove_suffix(1);
    p.user = std::string(user);
    return p;
}

Prompt build_prompt(const GenerationRequest& request) {
    Prompt p = generation_sections();

    const std::string constraints =
        request.constraints_text.empty() ? "(none)" : request.constraints_text;
    p.system = replace_all(std::move(p.system), "{constraints}", constraints);
    if (request.signals_text.empty()) {
        // Drop the slot's whole line so an unused section leaves no blank tail.
        p.system = replace_all(std::move(p.system), "\n{data_generation_signals}", "");
        p.system = replace_all(std::move(p.system), "{data_generation_signals}", "");
    } else {
        p.system =
            replace_all(std::move(p.system), "{data_generation_signals}", request.signals_text);
    }

    std::vector<std::string> names;
    names.reserve(request.columns.size());
    for (const auto& c : request.columns) names.push_back(c.dotted());
    std::string col_names = join(names, ", ");
    if (col_names.empty() && request.scope == GenerationRequest::Scope::NestedField)
        col_names = request.nested_field.dotted();

    p.user = replace_all(std::move(p.user), "{number_of_data_points}",
                         std::to_string(request.row_count));
    p.user = replace_all(std::move(p.user), "{col_names}", col_names);
    p.user = replace_all(std::move(p.user), "{user_input}", request.user_input);
    p.user = replace_all(std::move(p.user), "{proto_description}", request.proto_description);

    if (!request.retry_context.empty()) {
        p.user += "\n\n";
        p.user += kRetryPrefix;
        p.user += request.retry_context;
    }
    return p;
}

Prompt build_judge_prompt(std::string_view data_json, std::string_view constraints_text) {
    Prompt p = judge_sections();
    p.user = replace_all(std::move(p.user), "{data}", data_json);
    p.user = replace_all(std::move(p.user), "{constraints}", constraints_text);
    return p;
}

std::string render_proto_description(const SchemaSet& set, const SchemaDef& root,
                                     const std::vector<ColumnPath>& columns) {
    // Touched direct fields per message, and both kinds of definition in
    // first-touch order.
    std::map<const SchemaDef*, std::set<std::string>> touched;
    std::vector<const SchemaDef*> message_order;
    std::vector<const EnumKind*> enum_order;
    std::set<std::string> seen_enums;

    auto note_message = [&](const SchemaDef* m) {
        if (!touched.count(m)) {
            touched[m];
            message_order.push_back(m);
        }
    };
    note_message(&root);

    for (const auto& path : columns) {
        const SchemaDef* msg = &root;
        for (size_t i = 0; i < path.segments.size() && msg; ++i) {
            const FieldDef* f = msg->find_field(path.segments[i].name);
            if (!f) break;
            touched[msg].insert(f->name);
            if (f->is_nested()) {
                const SchemaDef* next = set.message(f->nested().message);
                if (!next) break;
                note_message(next);
                msg = next;
            } else {
                if (f->is_enum() && seen_enums.insert(f->enum_kind().type_name).second)
                    enum_order.push_back(&f->enum_kind());
                break;
            }
        }
    }

    std::string out;
    bool first_block = true;
    for (const SchemaDef* msg : message_order) {
        if (!first_block) out += '\n';
        first_block = false;
        append_comment(out, msg->annotation, "");
        out += "message " + msg->name + " {\n";
        int position = 0;
        for (const auto& f : msg->fields) {
            ++position;
            const bool in_scope = touched[msg].count(f.name) > 0;
            if (!in_scope && !f.deprecated) continue;
            append_comment(out, f.annotation, "  ");
            out += "  ";
            if (f.repeated) out += "repeated ";
            out += f.type_name() + " " + f.name + " = ";
            out += std::to_string(f.number > 0 ? f.number : position);
            if (f.deprecated) out += " [deprecated = true]";
            out += ";\n";
        }
        out += "}\n";
    }
    for (const EnumKind* ek : enum_order) {
        if (!first_block) out += '\n';
        first_block = false;
        const EnumDef* def = set.enum_def(ek->type_name);
        if (def) append_comment(out, def->annotation, "");
        out += "enum " + ek->type_name + " {\n";
        int idx = 0;
        for (const auto& v : ek->values) out += "  " + v + " = " + std::to_string(idx++) + ";\n";
        out += "}\n";
    }
    if (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

}  // namespace sdgen
