#include "mixkin/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "mixkin/csv.hpp"
#include "mixkin/errors.hpp"

namespace mixkin {

namespace {

void require_header(const std::vector<CsvRow>& rows, const std::vector<std::string>& names,
                    const std::string& path) {
    if (rows.empty() || !is_header(rows.front(), names)) {
        std::string want;
        for (const auto& n : names) want += (want.empty() ? "" : ",") + n;
        throw ValidationError(path + ": expected header '" + want + "'");
    }
}

void normalize_marker(MarkerFrequencies& mf, std::vector<std::string>* warnings,
                      const std::string& origin) {
    double sum = 0.0;
    for (double f : mf.freq) sum += f;
    if (!(sum > 0.0))
        throw ValidationError(origin + ": marker " + mf.marker + " has zero total frequency");
    if (std::fabs(sum - 1.0) <= 1e-12) return;  // keeps write/read round-trips exact
    if (warnings && std::fabs(sum - 1.0) > 1e-9)
        warnings->push_back("marker " + mf.marker + ": frequencies sum to " +
                            format_double(sum) + ", rescaled to 1");
    for (double& f : mf.freq) f /= sum;
}

void sort_marker(MarkerFrequencies& mf) {
    std::vector<std::size_t> order(mf.alleles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return allele_less(mf.alleles[i], mf.alleles[j]);
    });
    std::vector<AlleleLabel> al;
    std::vector<double> fr;
    al.reserve(order.size());
    fr.reserve(order.size());
    for (std::size_t i : order) {
        al.push_back(mf.alleles[i]);
        fr.push_back(mf.freq[i]);
    }
    mf.alleles = std::move(al);
    mf.freq = std::move(fr);
}

GenotypePair make_pair_sorted(AlleleLabel a, AlleleLabel b) {
    if (allele_less(b, a)) std::swap(a, b);
    return GenotypePair{std::move(a), std::move(b)};
}

}  // namespace

int MarkerFrequencies::index_of(const AlleleLabel& a) const {
    for (std::size_t i = 0; i < alleles.size(); ++i)
        if (alleles[i] == a) return static_cast<int>(i);
    return -1;
}

const MarkerFrequencies* FrequencyTable::find(const std::string& marker) const {
    for (const auto& m : markers)
        if (m.marker == marker) return &m;
    return nullptr;
}

MarkerFrequencies* FrequencyTable::find(const std::string& marker) {
    for (auto& m : markers)
        if (m.marker == marker) return &m;
    return nullptr;
}

int CaseBundle::contributor_index(const std::string& id) const {
    for (std::size_t i = 0; i < roster.size(); ++i)
        if (roster[i].id == id) return static_cast<int>(i);
    return -1;
}

const GenotypeProfile* CaseBundle::profile_of(const std::string& person_id) const {
    auto it = profiles.find(person_id);
    return it == profiles.end() ? nullptr : &it->second;
}

FrequencyTable load_frequency_table(const std::string& path) {
    auto rows = read_csv(path);
    require_header(rows, {"marker", "allele", "frequency"}, path);
    FrequencyTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        if (row.fields.size() != 3)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": expected 3 fields, got " +
                                  std::to_string(row.fields.size()));
        const std::string& marker = row.fields[0];
        if (marker.empty())
            throw ValidationError(path + ":" + std::to_string(row.line) + ": empty marker name");
        AlleleLabel allele = parse_allele_label(row.fields[1]);
        double f = parse_double(row.fields[2], path, row.line);
        if (!(f > 0.0) || f > 1.0)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": frequency " +
                                  row.fields[2] + " outside (0, 1]");
        MarkerFrequencies* mf = table.find(marker);
        if (!mf) {
            table.markers.push_back(MarkerFrequencies{marker, {}, {}});
            mf = &table.markers.back();
        }
        if (mf->index_of(allele) >= 0)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": duplicate allele " +
                                  allele.text + " for marker " + marker);
        mf->alleles.push_back(std::move(allele));
        mf->freq.push_back(f);
    }
    if (table.markers.empty()) throw ValidationError(path + ": no frequency rows");
    for (auto& mf : table.markers) {
        sort_marker(mf);
        normalize_marker(mf, &table.warnings, path);
    }
    return table;
}

FrequencyTable augment_rare_alleles(FrequencyTable table, const ObservedAlleles& observed,
                                    double floor) {
    if (!(floor > 0.0) || floor > 0.01)
        throw ValidationError("frequency floor must be in (0, 0.01]");
    // Pin every observed allele at >= floor, then rescale only the unpinned
    // mass; pinned values stay put, which makes a second pass a no-op.
    for (auto& mf : table.markers) {
        std::vector<bool> pinned(mf.alleles.size(), false);
        bool changed = false;
        for (const auto& [marker, label] : observed) {
            if (marker != mf.marker) continue;
            AlleleLabel allele = parse_allele_label(label);
            int idx = mf.index_of(allele);
            if (idx < 0) {
                mf.alleles.push_back(allele);
                mf.freq.push_back(floor);
                pinned.push_back(true);
                changed = true;
                table.augmentations.push_back("marker " + mf.marker + ": allele " + label +
                                              " added at " + format_double(floor));
            } else if (mf.freq[idx] < floor) {
                mf.freq[idx] = floor;
                pinned[idx] = true;
                changed = true;
                table.augmentations.push_back("marker " + mf.marker + ": allele " + label +
                                              " raised to " + format_double(floor));
            }
        }
        if (!changed) continue;
        double pinned_mass = 0.0, free_mass = 0.0;
        for (std::size_t i = 0; i < mf.freq.size(); ++i)
            (pinned[i] ? pinned_mass : free_mass) += mf.freq[i];
        double remaining = 1.0 - pinned_mass;
        if (!(remaining > 0.0) || !(free_mass > 0.0))
            throw ValidationError("marker " + mf.marker +
                                  ": rare-allele flooring exhausts the frequency mass");
        for (std::size_t i = 0; i < mf.freq.size(); ++i)
            if (!pinned[i]) mf.freq[i] *= remaining / free_mass;
        // restore ordering after the appends; pairs move together
        std::vector<std::size_t> order(mf.alleles.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return allele_less(mf.alleles[a], mf.alleles[b]);
        });
        std::vector<AlleleLabel> al;
        std::vector<double> fr;
        for (std::size_t i : order) {
            al.push_back(mf.alleles[i]);
            fr.push_back(mf.freq[i]);
        }
        mf.alleles = std::move(al);
        mf.freq = std::move(fr);
    }
    return table;
}

PeakTable load_peak_table(const std::string& path, const std::string& trace_id,
                          double threshold) {
    if (!(threshold > 0.0)) throw ValidationError("detection threshold must be > 0");
    auto rows = read_csv(path);
    require_header(rows, {"marker", "allele", "height"}, path);
    PeakTable peaks;
    peaks.trace_id = trace_id;
    peaks.threshold = threshold;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        if (row.fields.size() != 3)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": expected 3 fields, got " +
                                  std::to_string(row.fields.size()));
        Peak p;
        p.allele = parse_allele_label(row.fields[1]);
        p.height = parse_double(row.fields[2], path, row.line);
        if (p.height < 0.0)
            throw ValidationError(path + ":" + std::to_string(row.line) + ": negative height");
        p.sub_threshold = p.height < threshold;
        auto& list = peaks.markers[row.fields[0]];
        for (const Peak& q : list)
            if (q.allele == p.allele)
                throw ValidationError(path + ":" + std::to_string(row.line) +
                                      ": duplicate peak for marker " + row.fields[0] +
                                      " allele " + p.allele.text);
        list.push_back(std::move(p));
    }
    return peaks;
}

GenotypeProfile load_profile(const std::string& path, const std::string& person_id) {
    auto rows = read_csv(path);
    require_header(rows, {"marker", "allele1", "allele2"}, path);
    GenotypeProfile profile;
    profile.person_id = person_id;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const CsvRow& row = rows[r];
        if (row.fields.size() != 3)
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": expected 3 fields, got " +
                                  std::to_string(row.fields.size()));
        if (profile.markers.count(row.fields[0]))
            throw ValidationError(path + ":" + std::to_string(row.line) +
                                  ": duplicate marker " + row.fields[0]);
        profile.markers[row.fields[0]] = make_pair_sorted(parse_allele_label(row.fields[1]),
                                                          parse_allele_label(row.fields[2]));
    }
    return profile;
}

void inject_sex_marker(FrequencyTable& table, const CaseOptions& options) {
    if (options.sex_marker.empty() || table.find(options.sex_marker)) return;
    if (!(options.sex_freq_x > 0.0) || !(options.sex_freq_y > 0.0))
        throw ValidationError("sex-marker pseudo-frequencies must be positive");
    MarkerFrequencies mf;
    mf.marker = options.sex_marker;
    mf.alleles = {parse_allele_label("X"), parse_allele_label("Y")};
    double sum = options.sex_freq_x + options.sex_freq_y;
    mf.freq = {options.sex_freq_x / sum, options.sex_freq_y / sum};
    table.markers.push_back(std::move(mf));
}

void finalize_bundle(CaseBundle& bundle) {
    if (bundle.roster.empty()) throw ValidationError("contributor roster is empty");
    std::set<std::string> ids;
    for (const auto& c : bundle.roster) {
        if (c.id.empty()) throw ValidationError("contributor with empty id");
        if (!ids.insert(c.id).second)
            throw ValidationError("duplicate contributor id: " + c.id);
        if (c.known() && !bundle.profiles.count(c.profile_id))
            throw ValidationError("contributor " + c.id + " references unknown profile " +
                                  c.profile_id);
    }
    for (const auto& id : bundle.males)
        if (!ids.count(id)) throw ValidationError("male list names unknown contributor " + id);
    for (const auto& id : bundle.females) {
        if (!ids.count(id)) throw ValidationError("female list names unknown contributor " + id);
        if (bundle.males.count(id))
            throw ValidationError("contributor " + id + " listed both male and female");
    }

    // the sex marker joins the panel only when some data references it
    bool sex_referenced = false;
    const std::string& sm = bundle.options.sex_marker;
    if (!sm.empty()) {
        for (const auto& t : bundle.traces)
            if (t.markers.count(sm)) sex_referenced = true;
        for (const auto& [id, p] : bundle.profiles)
            if (p.typed_at(sm)) sex_referenced = true;
    }
    if (sex_referenced) inject_sex_marker(bundle.freqs, bundle.options);
    if ((!bundle.males.empty() || !bundle.females.empty()) &&
        (sm.empty() || !bundle.freqs.find(sm)))
        bundle.freqs.warnings.push_back(
            "sex evidence configured but the sex marker is absent from the case; ignored");

    for (const auto& t : bundle.traces)
        for (const auto& [marker, list] : t.markers) {
            if (!bundle.freqs.find(marker))
                throw ValidationError("trace " + t.trace_id + ": unknown marker " + marker);
            if (marker == sm)
                for (const Peak& p : list)
                    if (!p.allele.symbolic)
                        throw ValidationError("trace " + t.trace_id + ": sex-marker allele " +
                                              p.allele.text + " must be X or Y");
        }
    for (const auto& [id, p] : bundle.profiles)
        for (const auto& [marker, pair] : p.markers) {
            if (!bundle.freqs.find(marker))
                throw ValidationError("profile " + id + ": unknown marker " + marker);
            if (marker == sm && (!pair.a.symbolic || !pair.b.symbolic))
                throw ValidationError("profile " + id + ": sex-marker alleles must be X or Y");
        }

    ObservedAlleles observed;
    for (const auto& t : bundle.traces)
        for (const auto& [marker, list] : t.markers)
            for (const Peak& p : list) observed.insert({marker, p.allele.text});
    for (const auto& [id, p] : bundle.profiles)
        for (const auto& [marker, pair] : p.markers) {
            observed.insert({marker, pair.a.text});
            observed.insert({marker, pair.b.text});
        }
    bundle.freqs = augment_rare_alleles(std::move(bundle.freqs), observed,
                                        bundle.options.frequency_floor);

    // maleness evidence must not contradict a typed profile
    if (!sm.empty())
        for (const auto& c : bundle.roster) {
            if (!c.known()) continue;
            const GenotypeProfile* p = bundle.profile_of(c.profile_id);
            if (!p || !p->typed_at(sm)) continue;
            const GenotypePair& g = p->markers.at(sm);
            bool het = !(g.a == g.b);
            if (bundle.males.count(c.id) && !het)
                throw ValidationError("contributor " + c.id + " listed male but typed " +
                                      g.a.text + "," + g.b.text);
            if (bundle.females.count(c.id) && het)
                throw ValidationError("contributor " + c.id + " listed female but typed " +
                                      g.a.text + "," + g.b.text);
        }
}

namespace {

std::ofstream open_out(const std::string& path, const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path);
    for (const auto& c : comments) out << "# " << c << "\n";
    return out;
}

}  // namespace

void write_frequency_table(const FrequencyTable& table, const std::string& path,
                           const std::vector<std::string>& extra_comments) {
    auto out = open_out(path, extra_comments);
    out << "marker,allele,frequency\n";
    for (const auto& mf : table.markers)
        for (std::size_t i = 0; i < mf.alleles.size(); ++i)
            out << mf.marker << "," << mf.alleles[i].text << "," << format_double(mf.freq[i])
                << "\n";
}

void write_peak_table(const PeakTable& peaks, const std::string& path,
                      const std::vector<std::string>& extra_comments) {
    auto out = open_out(path, extra_comments);
    out << "marker,allele,height\n";
    for (const auto& [marker, list] : peaks.markers)
        for (const Peak& p : list)
            out << marker << "," << p.allele.text << "," << format_double(p.height) << "\n";
}

void write_profile(const GenotypeProfile& profile, const std::string& path,
                   const std::vector<std::string>& extra_comments) {
    auto out = open_out(path, extra_comments);
    out << "marker,allele1,allele2\n";
    for (const auto& [marker, pair] : profile.markers)
        out << marker << "," << pair.a.text << "," << pair.b.text << "\n";
}

}  // namespace mixkin
