#include "tomocg/setup_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tomocg::setup_io {

namespace fs = std::filesystem;

namespace {

std::string element_name(const std::string& role, int index) {
    std::ostringstream name;
    name << role << '_' << std::setw(3) << std::setfill('0') << index << ".txt";
    return name.str();
}

}  // namespace

void save_setup(const std::string& dir, const randgen::MeasurementSetup& setup,
                bool write_actual) {
    fs::create_directories(dir);
    std::ofstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw std::runtime_error("cannot write manifest in " + dir);
    manifest << std::setprecision(std::numeric_limits<double>::max_digits10);
    manifest << "dim = " << setup.dim << "\n";
    manifest << "m_total = " << setup.m_total << "\n";
    manifest << "m_well = " << setup.m_well << "\n";
    manifest << "mu = " << setup.mu << "\n";
    manifest << "scale = " << setup.scale << "\n";

    auto dump = [&](const std::string& role, const std::vector<qops::PovmElement>& elems) {
        for (std::size_t i = 0; i < elems.size(); ++i) {
            const std::string name = element_name(role, static_cast<int>(i));
            qops::save_operator((fs::path(dir) / name).string(), elems[i].matrix());
            manifest << role << ' ' << name << "\n";
        }
    };
    dump("well", setup.well);
    dump("intended", setup.intended);
    if (write_actual) dump("actual", setup.actual_ill);
}

randgen::MeasurementSetup load_setup(const std::string& dir) {
    std::ifstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw std::runtime_error("cannot open manifest in " + dir);

    randgen::MeasurementSetup setup;
    bool have_actual = false;
    std::string line;
    while (std::getline(manifest, line)) {
        std::istringstream row(line);
        std::string head;
        if (!(row >> head) || head.empty()) continue;
        if (head == "dim" || head == "m_total" || head == "m_well" || head == "mu" ||
            head == "scale") {
            std::string eq, value;
            row >> eq >> value;
            if (head == "dim") setup.dim = std::stoi(value);
            else if (head == "m_total") setup.m_total = std::stoi(value);
            else if (head == "m_well") setup.m_well = std::stoi(value);
            else if (head == "mu") setup.mu = std::stod(value);
            else setup.scale = std::stod(value);
        } else if (head == "well" || head == "intended" || head == "actual") {
            std::string name;
            row >> name;
            qops::PovmElement elem{qops::load_operator((fs::path(dir) / name).string())};
            if (head == "well") setup.well.push_back(std::move(elem));
            else if (head == "intended") setup.intended.push_back(std::move(elem));
            else {
                setup.actual_ill.push_back(std::move(elem));
                have_actual = true;
            }
        } else {
            throw std::runtime_error("manifest: unknown entry: " + head);
        }
    }
    if (!have_actual) setup.actual_ill = setup.intended;
    if (static_cast<int>(setup.well.size()) != setup.m_well ||
        static_cast<int>(setup.well.size() + setup.intended.size()) != setup.m_total ||
        setup.actual_ill.size() != setup.intended.size()) {
        throw std::runtime_error("manifest: element counts disagree with parameters");
    }
    return setup;
}

std::vector<qops::PovmElement> clean_elements(const randgen::MeasurementSetup& setup) {
    std::vector<qops::PovmElement> clean;
    clean.reserve(setup.m_total);
    for (const auto& pi : setup.well) clean.push_back(pi);
    for (const auto& pi : setup.intended) clean.push_back(pi);
    return clean;
}

}  // namespace tomocg::setup_io
