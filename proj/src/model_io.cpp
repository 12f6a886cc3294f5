#include "rbam/model_io.hpp"

#include "rbam/csv_io.hpp"
#include "rbam/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rbam {

namespace {

using nlohmann::json;

void put_vector(std::ostringstream& os, const Vector& v) {
    os << '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_real(v[i]);
    os << ']';
}

void put_matrix(std::ostringstream& os, const Matrix& m) {
    os << '[';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        os << (i ? ",\n    " : "\n    ");
        put_vector(os, m.row(i).transpose());
    }
    os << ']';
}

void put_mu(std::ostringstream& os, const ParameterVector& mu) {
    os << '[' << format_real(mu.K) << ',' << format_real(mu.r) << ',' << format_real(mu.q) << ','
       << format_real(mu.sigma) << ']';
}

std::string quoted(const std::string& s) { return json(s).dump(); }

}  // namespace

std::string serialize_model(const ReducedModel& model) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"schema_version\": " << kModelSchemaVersion << ",\n";
    os << "  \"mesh\": {\"H\": " << model.H << ", \"s_f\": " << format_real(model.s_f) << "},\n";
    os << "  \"time\": {\"T\": " << format_real(model.config.T) << ", \"L\": " << model.config.L
       << ", \"theta\": " << format_real(model.config.theta) << "},\n";
    os << "  \"NV_tilde\": " << model.NV_tilde << ",\n";
    os << "  \"NW\": " << model.NW << ",\n";
    os << "  \"NV\": " << model.NV << ",\n";

    const std::pair<const char*, const Matrix*> matrices[] = {
        {"psi_matrix", &model.psi_matrix}, {"xi_matrix", &model.xi_matrix}, {"Mass_N", &model.mass_N},
        {"A1_N", &model.A1_N},           {"A2_N", &model.A2_N},           {"A3_N", &model.A3_N}};
    for (const auto& [name, m] : matrices) {
        os << "  \"" << name << "\": ";
        put_matrix(os, *m);
        os << ",\n";
    }
    os << "  \"f1_N\": ";
    put_vector(os, model.f1_N);
    os << ",\n  \"f2_N\": ";
    put_vector(os, model.f2_N);
    os << ",\n  \"B_N\": ";
    put_matrix(os, model.B_N);
    os << ",\n  \"init_gram\": ";
    put_matrix(os, model.init_gram);
    os << ",\n  \"init_rhs_factor\": ";
    put_matrix(os, model.init_rhs_factor);
    os << ",\n";

    const GreedyDiagnostics& d = model.diagnostics;
    os << "  \"diagnostics\": {\n    \"eps_u\": ";
    put_vector(os, Eigen::Map<const Vector>(d.eps_u.data(), static_cast<Eigen::Index>(d.eps_u.size())));
    os << ",\n    \"eps_lambda\": ";
    put_vector(os, Eigen::Map<const Vector>(d.eps_lambda.data(), static_cast<Eigen::Index>(d.eps_lambda.size())));
    os << ",\n    \"selections\": {\n      \"pod\": [";
    for (std::size_t k = 0; k < d.selected_params_u.size(); ++k) {
        os << (k ? ", " : "") << "{\"mu_index\": " << d.selected_params_u[k] << ", \"mu\": ";
        put_mu(os, d.selected_mu_u.at(k));
        os << '}';
    }
    os << "],\n      \"angle\": [";
    for (std::size_t k = 0; k < d.selected_pairs_lambda.size(); ++k) {
        os << (k ? ", " : "") << "{\"mu_index\": " << d.selected_pairs_lambda[k].mu_index
           << ", \"n\": " << d.selected_pairs_lambda[k].n << ", \"mu\": ";
        put_mu(os, d.selected_mu_lambda.at(k));
        os << '}';
    }
    os << "]\n    },\n    \"warnings\": [";
    for (std::size_t k = 0; k < d.warnings.size(); ++k) os << (k ? ", " : "") << quoted(d.warnings[k]);
    os << "]\n  }\n}\n";
    return os.str();
}

namespace {

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw LoadError(std::string("model file: missing field '") + name + "'");
    return j.at(name);
}

double number(const json& j, const char* what) {
    if (!j.is_number()) throw LoadError(std::string("model file: '") + what + "' is not a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw LoadError(std::string("model file: '") + what + "' is not finite");
    return v;
}

int integer(const json& j, const char* what) {
    if (!j.is_number_integer()) throw LoadError(std::string("model file: '") + what + "' is not an integer");
    return j.get<int>();
}

Vector read_vector(const json& j, const char* name, Eigen::Index expected) {
    if (!j.is_array()) throw LoadError(std::string("model file: '") + name + "' is not an array");
    if (static_cast<Eigen::Index>(j.size()) != expected) {
        throw LoadError(std::string("model file: '") + name + "' has length " + std::to_string(j.size()) +
                        ", expected " + std::to_string(expected));
    }
    Vector v(expected);
    for (Eigen::Index i = 0; i < expected; ++i) v[i] = number(j[static_cast<std::size_t>(i)], name);
    return v;
}

Matrix read_matrix(const json& j, const char* name, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw LoadError(std::string("model file: '") + name + "' must have " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = read_vector(j[static_cast<std::size_t>(i)], name, cols);
    return m;
}

ParameterVector read_mu(const json& j) {
    const Vector v = read_vector(j, "mu", 4);
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

ReducedModel deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw LoadError(std::string("model file is not valid JSON: ") + e.what());
    }

    const int version = integer(field(doc, "schema_version"), "schema_version");
    if (version != kModelSchemaVersion) {
        throw VersionMismatch("model file schema_version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kModelSchemaVersion) + ")");
    }

    ReducedModel m;
    try {
        const json& mesh = field(doc, "mesh");
        m.H = integer(field(mesh, "H"), "H");
        m.s_f = number(field(mesh, "s_f"), "s_f");
        const json& time = field(doc, "time");
        m.config.T = number(field(time, "T"), "T");
        m.config.L = integer(field(time, "L"), "L");
        m.config.theta = number(field(time, "theta"), "theta");
        m.config.validate();
        m.NV_tilde = integer(field(doc, "NV_tilde"), "NV_tilde");
        m.NW = integer(field(doc, "NW"), "NW");
        m.NV = integer(field(doc, "NV"), "NV");
    } catch (const std::invalid_argument& e) {
        throw LoadError(std::string("model file: ") + e.what());
    }
    if (m.H < 2 || !(m.s_f > 0.0) || m.NV_tilde < 1 || m.NW < 0 || m.NV < m.NV_tilde || m.NV > m.NV_tilde + m.NW) {
        throw LoadError("model file: inconsistent sizes");
    }

    const Eigen::Index H = m.H, NV = m.NV, NW = m.NW;
    m.psi_matrix = read_matrix(field(doc, "psi_matrix"), "psi_matrix", H, NV);
    m.xi_matrix = read_matrix(field(doc, "xi_matrix"), "xi_matrix", H, NW);
    m.mass_N = read_matrix(field(doc, "Mass_N"), "Mass_N", NV, NV);
    m.A1_N = read_matrix(field(doc, "A1_N"), "A1_N", NV, NV);
    m.A2_N = read_matrix(field(doc, "A2_N"), "A2_N", NV, NV);
    m.A3_N = read_matrix(field(doc, "A3_N"), "A3_N", NV, NV);
    m.f1_N = read_vector(field(doc, "f1_N"), "f1_N", NV);
    m.f2_N = read_vector(field(doc, "f2_N"), "f2_N", NV);
    m.B_N = read_matrix(field(doc, "B_N"), "B_N", NV, NW);
    m.init_gram = read_matrix(field(doc, "init_gram"), "init_gram", NV, NV);
    m.init_rhs_factor = read_matrix(field(doc, "init_rhs_factor"), "init_rhs_factor", H, NV);

    const json& diag = field(doc, "diagnostics");
    for (const json& v : field(diag, "eps_u")) m.diagnostics.eps_u.push_back(number(v, "eps_u"));
    for (const json& v : field(diag, "eps_lambda")) m.diagnostics.eps_lambda.push_back(number(v, "eps_lambda"));
    const json& sel = field(diag, "selections");
    for (const json& s : field(sel, "pod")) {
        m.diagnostics.selected_params_u.push_back(static_cast<std::size_t>(integer(field(s, "mu_index"), "mu_index")));
        m.diagnostics.selected_mu_u.push_back(read_mu(field(s, "mu")));
    }
    for (const json& s : field(sel, "angle")) {
        m.diagnostics.selected_pairs_lambda.push_back(
            {static_cast<std::size_t>(integer(field(s, "mu_index"), "mu_index")), integer(field(s, "n"), "n")});
        m.diagnostics.selected_mu_lambda.push_back(read_mu(field(s, "mu")));
    }
    for (const json& w : field(diag, "warnings")) {
        if (!w.is_string()) throw LoadError("model file: warnings must be strings");
        m.diagnostics.warnings.push_back(w.get<std::string>());
    }

    try {
        check_inf_sup(m.B_N);
    } catch (const InfSupFailure& e) {
        throw LoadError(std::string("model file fails the inf-sup check: ") + e.what());
    }
    return m;
}

void save_model(const ReducedModel& model, const std::string& path) { write_text_file(path, serialize_model(model)); }

ReducedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open model file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace rbam
