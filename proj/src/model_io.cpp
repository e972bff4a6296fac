#include "bisimet/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

namespace bisimet {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& what) {
    throw Error(ErrorKind::schema, "model schema: " + what);
}

std::vector<std::string> string_list(const json& j, const char* field) {
    if (!j.contains(field)) schema_error(std::string("missing field \"") + field + "\"");
    const json& arr = j.at(field);
    if (!arr.is_array() || arr.empty()) {
        schema_error(std::string("\"") + field + "\" must be a non-empty array of strings");
    }
    std::vector<std::string> out;
    out.reserve(arr.size());
    for (const json& item : arr) {
        if (!item.is_string()) {
            schema_error(std::string("\"") + field + "\" must contain only strings");
        }
        out.push_back(item.get<std::string>());
    }
    return out;
}

Scalar number_at(const json& j, const std::string& context) {
    if (!j.is_number()) schema_error(context + " must be a number");
    return j.get<Scalar>();
}

Mdp parse_model(const json& j) {
    if (!j.is_object()) schema_error("top level must be an object");
    std::vector<std::string> states = string_list(j, "states");
    std::vector<std::string> actions = string_list(j, "actions");

    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].empty() || states[i].find_first_of(",\n\r") != std::string::npos) {
            std::ostringstream os;
            os << "state name " << i << " must be non-empty and free of commas and newlines";
            throw Error(ErrorKind::validation, os.str());
        }
        for (std::size_t b = 0; b < i; ++b) {
            if (states[b] == states[i]) {
                throw Error(ErrorKind::validation, "duplicate state name: " + states[i]);
            }
        }
    }
    for (std::size_t a = 0; a < actions.size(); ++a) {
        if (actions[a].empty()) {
            std::ostringstream os;
            os << "action name " << a << " must be non-empty";
            throw Error(ErrorKind::validation, os.str());
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (actions[b] == actions[a]) {
                throw Error(ErrorKind::validation, "duplicate action label: " + actions[a]);
            }
        }
    }

    if (!j.contains("transitions") || !j.at("transitions").is_object()) {
        schema_error("missing object field \"transitions\"");
    }
    if (!j.contains("rewards") || !j.at("rewards").is_object()) {
        schema_error("missing object field \"rewards\"");
    }
    const json& transitions = j.at("transitions");
    const json& rewards = j.at("rewards");

    const auto n = static_cast<Eigen::Index>(states.size());
    std::vector<Mdp::Arm> arms;
    arms.reserve(actions.size());
    for (const std::string& label : actions) {
        if (!transitions.contains(label)) {
            schema_error("\"transitions\" is missing action \"" + label + "\"");
        }
        if (!rewards.contains(label)) {
            schema_error("\"rewards\" is missing action \"" + label + "\"");
        }
        const json& rows = transitions.at(label);
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
            std::ostringstream os;
            os << "transitions for action \"" << label << "\" must be an array of " << n
               << " rows";
            schema_error(os.str());
        }
        Mdp::Arm arm;
        arm.label = label;
        arm.rows.reserve(states.size());
        for (Eigen::Index x = 0; x < n; ++x) {
            const json& row = rows.at(x);
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
                std::ostringstream os;
                os << "transition row for action \"" << label << "\", state " << x
                   << " must have " << n << " entries";
                schema_error(os.str());
            }
            Vec p(n);
            for (Eigen::Index y = 0; y < n; ++y) {
                std::ostringstream ctx;
                ctx << "transition (" << label << ", state " << x << ", target " << y << ")";
                const Scalar v = number_at(row.at(y), ctx.str());
                if (!(v >= 0.0 && v <= 1.0)) {
                    std::ostringstream os;
                    os << "transition probability for action \"" << label << "\", state " << x
                       << ", target " << y << " = " << v << " outside [0,1]";
                    throw Error(ErrorKind::validation, os.str());
                }
                p(y) = v;
            }
            const Scalar total = p.sum();
            if (std::abs(total - 1.0) > Dist::sum_tol) {
                std::ostringstream os;
                os << "transition row for action \"" << label << "\", state " << x
                   << " sums to " << total << ", more than " << Dist::sum_tol
                   << " away from 1";
                throw Error(ErrorKind::validation, os.str());
            }
            arm.rows.emplace_back(std::move(p));
        }
        const json& rew = rewards.at(label);
        if (!rew.is_array() || static_cast<Eigen::Index>(rew.size()) != n) {
            std::ostringstream os;
            os << "rewards for action \"" << label << "\" must be an array of " << n
               << " numbers";
            schema_error(os.str());
        }
        Vec r(n);
        for (Eigen::Index x = 0; x < n; ++x) {
            std::ostringstream ctx;
            ctx << "reward (" << label << ", state " << x << ")";
            const Scalar v = number_at(rew.at(x), ctx.str());
            if (!(v >= 0.0 && v <= 1.0)) {
                std::ostringstream os;
                os << "reward for action \"" << label << "\", state " << x << " = " << v
                   << " outside [0,1]";
                throw Error(ErrorKind::validation, os.str());
            }
            r(x) = v;
        }
        arm.rewards = std::move(r);
        arms.push_back(std::move(arm));
    }
    return Mdp(std::move(states), std::move(arms));
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << "JSON parse error at byte " << e.byte << ": " << e.what();
        throw Error(ErrorKind::json_parse, os.str());
    }
}

}  // namespace

Mdp load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_failure, "cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::io_failure, "error reading model file: " + path);
    return load_model_from_string(buf.str());
}

Mdp load_model_from_string(const std::string& text) {
    return parse_model(parse_json_text(text));
}

std::string serialize_model(const Mdp& m) {
    ordered_json j;
    j["states"] = m.state_names();
    std::vector<std::string> actions;
    for (Eigen::Index a = 0; a < m.n_actions(); ++a) actions.push_back(m.action_label(a));
    j["actions"] = actions;
    ordered_json transitions = ordered_json::object();
    ordered_json rewards = ordered_json::object();
    for (Eigen::Index a = 0; a < m.n_actions(); ++a) {
        ordered_json rows = ordered_json::array();
        for (StateId x = 0; x < m.n_states(); ++x) {
            const Vec& p = m.kernel(a, x).probs();
            ordered_json row = ordered_json::array();
            for (Eigen::Index y = 0; y < p.size(); ++y) row.push_back(p(y));
            rows.push_back(std::move(row));
        }
        transitions[m.action_label(a)] = std::move(rows);
        ordered_json rew = ordered_json::array();
        for (StateId x = 0; x < m.n_states(); ++x) rew.push_back(m.reward(a, x));
        rewards[m.action_label(a)] = std::move(rew);
    }
    j["transitions"] = std::move(transitions);
    j["rewards"] = std::move(rewards);
    return j.dump(2) + "\n";
}

std::string format_fixed12(Scalar v) {
    if (v == 0.0) v = 0.0;  // normalize -0.0
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12f", v);
    return buf;
}

void write_metric_csv(std::ostream& os, const std::vector<std::string>& names, const Mat& d) {
    if (static_cast<Eigen::Index>(names.size()) != d.rows() || d.rows() != d.cols()) {
        throw Error(ErrorKind::dimension_mismatch, "metric CSV: name count must match matrix size");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) os << ',';
        os << names[i];
    }
    os << '\n';
    for (Eigen::Index x = 0; x < d.rows(); ++x) {
        for (Eigen::Index y = 0; y < d.cols(); ++y) {
            if (y > 0) os << ',';
            os << format_fixed12(d(x, y));
        }
        os << '\n';
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::pair<std::vector<std::string>, Mat> read_metric_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorKind::schema, "metric CSV: missing header row");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> names = split_csv_line(line);
    const auto n = static_cast<Eigen::Index>(names.size());
    if (n == 0) throw Error(ErrorKind::schema, "metric CSV: empty header row");
    Mat d(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        if (!std::getline(is, line)) {
            std::ostringstream os;
            os << "metric CSV: expected " << n << " data rows, found " << x;
            throw Error(ErrorKind::schema, os.str());
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<Eigen::Index>(fields.size()) != n) {
            std::ostringstream os;
            os << "metric CSV: row " << x << " has " << fields.size() << " fields, expected "
               << n;
            throw Error(ErrorKind::schema, os.str());
        }
        for (Eigen::Index y = 0; y < n; ++y) {
            try {
                std::size_t consumed = 0;
                d(x, y) = std::stod(fields[y], &consumed);
                if (consumed != fields[y].size()) throw std::invalid_argument(fields[y]);
            } catch (const std::exception&) {
                std::ostringstream os;
                os << "metric CSV: row " << x << ", column " << y << ": not a number: "
                   << fields[y];
                throw Error(ErrorKind::schema, os.str());
            }
        }
    }
    return {std::move(names), std::move(d)};
}

std::pair<std::vector<std::string>, Mat> read_metric_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_failure, "cannot open metric CSV: " + path);
    return read_metric_csv(in);
}

}  // namespace bisimet
