#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairsq/dsl/parser.hpp"
#include "fairsq/dsl/validate.hpp"
#include "fairsq/symexec.hpp"

#ifndef FAIRSQ_FIXTURES_DIR
#error "FAIRSQ_FIXTURES_DIR must be defined"
#endif

namespace fairsq::test {

inline std::string fixture_path(const std::string& name) { return std::string(FAIRSQ_FIXTURES_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name)
{
    std::ifstream in(fixture_path(name), std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open fixture " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline dsl::ValidatedTask load_text(const std::string& text)
{
    auto result = dsl::validate(dsl::parse_source(text));
    if (!result.ok()) {
        std::string msg = "task does not validate:";
        for (const auto& d : result.diagnostics)
            msg += "\n  " + d.to_string();
        throw std::runtime_error(msg);
    }
    return std::move(*result.task);
}

inline dsl::ValidatedTask load_fixture(const std::string& name) { return load_text(read_fixture(name)); }

// Fixtures that parse and validate.
inline const std::vector<std::string>& valid_fixtures()
{
    static const std::vector<std::string> names{"casestudy.fg", "const_true.fg", "const_false.fg", "halfspace.fg",
        "symmetric.fg", "bernoulli.fg", "relu.fg", "svm.fg", "disjunctive.fg"};
    return names;
}

// Union of the program paths returning true, ignoring the sensitive condition.
inline EventRegion qualified_region(const PathSet& paths)
{
    EventRegion out;
    out.dimension = paths.gaussian_dimension();
    RegionComponent comp;
    for (const auto& p : paths.paths)
        if (p.return_value)
            comp.region.conjunctions.push_back(p.constraints);
    out.components.push_back(std::move(comp));
    return out;
}

inline EventRegion single_component(Region r, std::size_t dimension)
{
    EventRegion out;
    out.dimension = dimension;
    RegionComponent comp;
    comp.region = std::move(r);
    out.components.push_back(std::move(comp));
    return out;
}

} // namespace fairsq::test
