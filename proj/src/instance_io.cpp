#include "ssmtree/instance_io.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace ssmtree {

namespace {

BoundaryMap parse_boundary(const nlohmann::json& arr, int q) {
    BoundaryMap boundary;
    for (const auto& entry : arr) {
        const VertexAddress v = VertexAddress::parse(entry.at("v").get<std::string>());
        const int color = entry.at("c").get<int>();
        if (color < 1 || color > q) {
            throw std::invalid_argument("color " + std::to_string(color) + " at \"" + v.str() +
                                        "\" outside 1.." + std::to_string(q));
        }
        if (!boundary.emplace(v, color - 1).second) {
            throw std::invalid_argument("duplicate boundary address \"" + v.str() + "\"");
        }
    }
    return boundary;
}

nlohmann::json dump_boundary(const BoundaryMap& boundary) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [v, c] : boundary) {
        arr.push_back({{"v", v.str()}, {"c", c + 1}});
    }
    return arr;
}

}  // namespace

BoundaryPair load_instance(std::istream& in) {
    nlohmann::json doc;
    in >> doc;
    BoundaryPair pair;
    pair.instance.q = doc.at("q").get<int>();
    pair.instance.d = doc.at("d").get<int>();
    pair.instance.h = doc.at("h").get<int>();
    pair.eta = parse_boundary(doc.at("eta"), pair.instance.q);
    pair.eta_prime = doc.contains("eta_prime") ? parse_boundary(doc.at("eta_prime"), pair.instance.q)
                                               : pair.eta;
    pair.instance.boundary = pair.eta;
    pair.validate();
    return pair;
}

BoundaryPair load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open instance file: " + path);
    return load_instance(in);
}

std::string save_instance(const BoundaryPair& pair) {
    nlohmann::json doc;
    doc["q"] = pair.instance.q;
    doc["d"] = pair.instance.d;
    doc["h"] = pair.instance.h;
    doc["eta"] = dump_boundary(pair.eta);
    doc["eta_prime"] = dump_boundary(pair.eta_prime);
    return doc.dump(2) + "\n";
}

}  // namespace ssmtree
