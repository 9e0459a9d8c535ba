#pragma once

// JSON model files: direct (A, B, C, D) matrices, transfer-function block
// grids, and interconnection recipes over named subsystems.

#include <covkit/errors.hpp>
#include <covkit/matrix.hpp>
#include <covkit/state_space.hpp>

#include <json.hpp>

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace covkit {

namespace detail {

/// Translate a byte offset (1-based, as nlohmann reports it) into line:column.
inline std::pair<std::size_t, std::size_t> line_col_at(const std::string& text,
                                                       std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_col_at(text, e.byte);
        std::ostringstream msg;
        msg << origin << ":" << line << ":" << col << ": " << e.what();
        throw ParseError(msg.str());
    }
}

inline Matrix matrix_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array())
        throw ParseError("matrix '" + key + "' must be an array of row arrays");
    if (j.empty()) return Matrix(0, 0);
    const std::size_t n_rows = j.size();
    std::size_t width = 0;
    Matrix m;
    for (std::size_t i = 0; i < n_rows; ++i) {
        const auto& row = j[i];
        if (!row.is_array())
            throw ParseError("matrix '" + key + "': every row must be an array");
        if (i == 0) {
            width = row.size();
            m = Matrix(n_rows, width);
        } else if (row.size() != width) {
            throw ParseError("matrix '" + key + "': ragged rows (" +
                             std::to_string(row.size()) + " vs " + std::to_string(width) +
                             " columns)");
        }
        for (std::size_t c = 0; c < width; ++c) {
            if (!row[c].is_number())
                throw ParseError("matrix '" + key + "': entries must be numbers");
            m(i, c) = row[c].get<double>();
        }
    }
    return m;
}

inline double number_field(const nlohmann::json& j, const std::string& key,
                           const std::string& where) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(where + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

inline std::array<double, 3> triple_field(const nlohmann::json& j, const std::string& key,
                                          const std::string& where) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw ParseError(where + ": field '" + key + "' must be an array of 3 numbers");
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!j[key][i].is_number())
            throw ParseError(where + ": field '" + key + "' must contain numbers only");
        out[i] = j[key][i].get<double>();
    }
    return out;
}

/// A single transfer-function block; null stands for a zero-gain entry.
inline StateSpaceModel tf_block_from_json(const nlohmann::json& j, std::size_t row,
                                          std::size_t col) {
    const std::string where =
        "tf_blocks[" + std::to_string(row) + "][" + std::to_string(col) + "]";
    if (j.is_null()) return static_gain(Matrix(1, 1));
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw ParseError(where + ": block must be null or an object with a 'type' string");
    const std::string type = j["type"].get<std::string>();
    if (type == "second_order")
        return second_order_siso(number_field(j, "k", where), number_field(j, "wn", where),
                                 number_field(j, "zeta", where));
    if (type == "first_order")
        return first_order_siso(number_field(j, "k", where), number_field(j, "wc", where));
    if (type == "biquad")
        return biquad_siso(triple_field(j, "num", where), triple_field(j, "den", where));
    if (type == "pd")
        return pd_controller(number_field(j, "kp", where), number_field(j, "kd", where),
                             number_field(j, "tk", where));
    throw ParseError(where + ": unknown block type '" + type + "'");
}

inline std::vector<std::string> labels_from_json(const nlohmann::json& j,
                                                 const std::string& key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) throw ParseError("'" + key + "' must be an array of strings");
    for (const auto& v : j[key]) {
        if (!v.is_string()) throw ParseError("'" + key + "' must contain strings only");
        out.push_back(v.get<std::string>());
    }
    return out;
}

} // namespace detail

inline StateSpaceModel model_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir);

inline StateSpaceModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const nlohmann::json j = detail::parse_json_text(buf.str(), path.string());
    return model_from_json(j, path.has_parent_path() ? path.parent_path()
                                                     : std::filesystem::path("."));
}

namespace detail {

/// Evaluate the "connect" directives of a recipe over named subsystems.
inline StateSpaceModel evaluate_recipe(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir) {
    std::map<std::string, StateSpaceModel> env;
    if (!j["subsystems"].is_object())
        throw ParseError("recipe: 'subsystems' must be an object of named models");
    for (const auto& [name, val] : j["subsystems"].items()) {
        if (val.is_string())
            env.emplace(name, load_model_file(base_dir / val.get<std::string>()));
        else
            env.emplace(name, model_from_json(val, base_dir));
    }

    auto lookup = [&](const nlohmann::json& step, const std::string& key) -> StateSpaceModel& {
        if (!step.contains(key) || !step[key].is_string())
            throw ParseError("recipe connect step: missing model reference '" + key + "'");
        const std::string name = step[key].get<std::string>();
        auto it = env.find(name);
        if (it == env.end())
            throw ParseError("recipe connect step: unknown subsystem '" + name + "'");
        return it->second;
    };
    auto out_name = [&](const nlohmann::json& step) {
        if (!step.contains("as") || !step["as"].is_string())
            throw ParseError("recipe connect step: missing result name 'as'");
        return step["as"].get<std::string>();
    };

    if (j.contains("connect")) {
        if (!j["connect"].is_array())
            throw ParseError("recipe: 'connect' must be an array of steps");
        for (const auto& step : j["connect"]) {
            if (!step.is_object() || !step.contains("op") || !step["op"].is_string())
                throw ParseError("recipe connect step: missing 'op' string");
            const std::string op = step["op"].get<std::string>();
            if (op == "series") {
                env[out_name(step)] = series(lookup(step, "first"), lookup(step, "second"));
            } else if (op == "feedback") {
                int sign = -1;
                if (step.contains("sign")) {
                    if (!step["sign"].is_number_integer())
                        throw ParseError("recipe feedback: 'sign' must be an integer");
                    sign = step["sign"].get<int>();
                }
                env[out_name(step)] = feedback(lookup(step, "plant"), lookup(step, "feedback"),
                                               sign);
            } else if (op == "select_outputs") {
                if (!step.contains("indices") || !step["indices"].is_array())
                    throw ParseError("recipe select_outputs: 'indices' must be an array");
                std::vector<std::size_t> idx;
                for (const auto& v : step["indices"]) {
                    if (!v.is_number_unsigned())
                        throw ParseError("recipe select_outputs: indices must be nonnegative "
                                         "integers");
                    idx.push_back(v.get<std::size_t>());
                }
                env[out_name(step)] = select_outputs(lookup(step, "of"), idx);
            } else if (op == "identity") {
                if (!step.contains("size") || !step["size"].is_number_unsigned())
                    throw ParseError("recipe identity: 'size' must be a nonnegative integer");
                env[out_name(step)] = identity_static(step["size"].get<std::size_t>());
            } else if (op == "sum_at_output") {
                env[out_name(step)] =
                    sum_at_output(lookup(step, "model"), lookup(step, "disturbance"));
            } else if (op == "append_inputs") {
                env[out_name(step)] = append_inputs(lookup(step, "of"),
                                                    matrix_from_json(step.at("B"), "B"),
                                                    matrix_from_json(step.at("D"), "D"));
            } else {
                throw ParseError("recipe connect step: unknown op '" + op + "'");
            }
        }
    }

    if (!j.contains("model") || !j["model"].is_string())
        throw ParseError("recipe: missing final 'model' name");
    const std::string final_name = j["model"].get<std::string>();
    auto it = env.find(final_name);
    if (it == env.end()) throw ParseError("recipe: unknown final model '" + final_name + "'");
    return it->second;
}

} // namespace detail

/// Build a model from parsed JSON: direct matrices, a tf-block grid, or a
/// recipe with subsystems. base_dir resolves relative file references.
inline StateSpaceModel model_from_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ParseError("model: top level must be a JSON object");
    try {
        if (j.contains("subsystems")) return detail::evaluate_recipe(j, base_dir);

        if (j.contains("tf_blocks")) {
            if (!j["tf_blocks"].is_array() || j["tf_blocks"].empty())
                throw ParseError("'tf_blocks' must be a nonempty array of rows");
            std::vector<std::vector<StateSpaceModel>> grid;
            std::size_t r = 0;
            for (const auto& row : j["tf_blocks"]) {
                if (!row.is_array())
                    throw ParseError("'tf_blocks' rows must be arrays of blocks");
                std::vector<StateSpaceModel> grow;
                std::size_t c = 0;
                for (const auto& cell : row) grow.push_back(detail::tf_block_from_json(cell, r, c++));
                grid.push_back(std::move(grow));
                ++r;
            }
            StateSpaceModel m = mimo_from_blocks(grid);
            m.input_labels = detail::labels_from_json(j, "input_labels");
            m.output_labels = detail::labels_from_json(j, "output_labels");
            m.validate_shapes();
            return m;
        }

        if (!j.contains("A") || !j.contains("B") || !j.contains("C"))
            throw ParseError("model object must provide A, B, C (with optional D), a "
                             "'tf_blocks' grid, or a recipe with 'subsystems'");
        Matrix a = detail::matrix_from_json(j["A"], "A");
        Matrix b = detail::matrix_from_json(j["B"], "B");
        Matrix c = detail::matrix_from_json(j["C"], "C");
        Matrix d;
        const bool has_d = j.contains("D") && !j["D"].is_null();
        if (has_d) d = detail::matrix_from_json(j["D"], "D");
        if (a.rows() == 0) {
            // Static gain: shapes of B and C are implied by D.
            if (!has_d) throw ParseError("static model (empty A) requires D");
            b = Matrix(0, d.cols());
            c = Matrix(d.rows(), 0);
        } else if (!has_d) {
            d = Matrix(c.rows(), b.cols());
        }
        StateSpaceModel m(std::move(a), std::move(b), std::move(c), std::move(d));
        m.input_labels = detail::labels_from_json(j, "input_labels");
        m.output_labels = detail::labels_from_json(j, "output_labels");
        m.validate_shapes();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model: malformed structure: ") + e.what());
    }
}

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

/// Serialize a model to the direct-matrix schema. Doubles round-trip exactly.
inline nlohmann::json dump_model_json(const StateSpaceModel& m) {
    nlohmann::json j;
    j["A"] = detail::matrix_to_json(m.A);
    j["B"] = detail::matrix_to_json(m.B);
    j["C"] = detail::matrix_to_json(m.C);
    j["D"] = detail::matrix_to_json(m.D);
    if (!m.input_labels.empty()) j["input_labels"] = m.input_labels;
    if (!m.output_labels.empty()) j["output_labels"] = m.output_labels;
    return j;
}

} // namespace covkit
