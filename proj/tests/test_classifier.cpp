#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "pidstats/classifier.hpp"

using namespace pidstats;

namespace {

const ResolverWatchList& wl() {
    static ResolverWatchList list = ResolverWatchList::defaults();
    return list;
}

std::optional<PidObservation> classify_link(const std::string& raw) {
    return classify(normalize(raw, wl().predicate()), PidSource::BodyLink, wl());
}

}  // namespace

TEST_CASE("actionable forms on watch-list hosts") {
    auto obs = classify_link("https://doi.org/10.1000/182");
    REQUIRE(obs.has_value());
    CHECK(obs->form == PidForm::Actionable);
    CHECK(obs->scheme_class == SchemeClass::DOI);
    CHECK(obs->pid == "10.1000/182");
    CHECK(obs->resolver_host == "doi.org");

    auto hdl = classify_link("http://hdl.handle.net/2027/spo.ark5583");
    REQUIRE(hdl.has_value());
    CHECK(hdl->form == PidForm::Actionable);
    CHECK(hdl->scheme_class == SchemeClass::Handle);
    CHECK(hdl->pid == "2027/spo.ark5583");

    auto n2t = classify_link("https://n2t.net/ark:/12345/x9");
    REQUIRE(n2t.has_value());
    CHECK(n2t->scheme_class == SchemeClass::Other);
    CHECK(n2t->pid == "ark:/12345/x9");
}

TEST_CASE("original forms via doi: and info: schemes") {
    auto doi = classify_link("doi:10.1000/182");
    REQUIRE(doi.has_value());
    CHECK(doi->form == PidForm::Original);
    CHECK(doi->scheme_class == SchemeClass::DOI);
    CHECK(doi->pid == "10.1000/182");

    auto info_hdl = classify_link("info:hdl/2027/spo.ark5583");
    REQUIRE(info_hdl.has_value());
    CHECK(info_hdl->form == PidForm::Original);
    CHECK(info_hdl->scheme_class == SchemeClass::Handle);
    CHECK(info_hdl->pid == "2027/spo.ark5583");

    auto info_doi = classify_link("info:doi/10.5555/12345678");
    REQUIRE(info_doi.has_value());
    CHECK(info_doi->scheme_class == SchemeClass::DOI);
    CHECK(info_doi->pid == "10.5555/12345678");

    // other info: namespaces are not PIDs here
    CHECK_FALSE(classify_link("info:lccn/2002022641").has_value());
}

TEST_CASE("non-PID links are ignored") {
    CHECK_FALSE(classify_link("https://example.com/10.1000/182").has_value());
    CHECK_FALSE(classify_link("mailto:x@doi.org").has_value());
    CHECK_FALSE(classify_link("/relative/only").has_value());
    // watch host but empty path → no PID
    CHECK_FALSE(classify_link("https://doi.org/").has_value());
    CHECK_FALSE(classify_link("https://doi.org").has_value());
}

TEST_CASE("DOI prefix compares case-insensitively, suffix case preserved") {
    auto a = classify_link("https://doi.org/10.IJKL/MixedCase");
    REQUIRE(a.has_value());
    CHECK(a->pid == "10.ijkl/MixedCase");
    // handle suffixes stay case-sensitive
    auto h = classify_link("http://hdl.handle.net/2027/SPO");
    REQUIRE(h.has_value());
    CHECK(h->pid == "2027/SPO");
}

TEST_CASE("query and fragment never leak into the PID") {
    auto obs = classify_link("https://dx.doi.org/10.1000/182?nosfx=y#sec2");
    REQUIRE(obs.has_value());
    CHECK(obs->pid == "10.1000/182");
    CHECK(obs->resolver_host == "dx.doi.org");
}

TEST_CASE("all spellings of one PID collapse to one key") {
    const char* spellings[] = {
        "https://doi.org/10.1000/182",
        "HTTPS://DOI.ORG/10.1000/182",
        "https://doi.org/10.1000%2F182",
        "https://doi.org/10.1000/18 2\n",
        "https://doi.org/10.1000/182?sid=x",
        "http://doi.org/10.1000/182",
    };
    for (const char* s : spellings) {
        auto obs = classify_link(s);
        CAPTURE(s);
        REQUIRE(obs.has_value());
        CHECK(obs->pid == "10.1000/182");
        CHECK(obs->scheme_class == SchemeClass::DOI);
    }
}

TEST_CASE("locating form recognized only through the filter") {
    BloomFilter filter(100, 1e-4);
    filter.insert("http://journal.test/article/42");

    NormalizedUri uri = normalize("http://journal.test/article/42");
    CHECK_FALSE(classify(uri, PidSource::BodyLink, wl()).has_value());

    auto obs = classify(uri, PidSource::BodyLink, wl(), &filter);
    REQUIRE(obs.has_value());
    CHECK(obs->form == PidForm::Locating);
    CHECK(obs->pid == "http://journal.test/article/42");

    NormalizedUri other = normalize("http://journal.test/article/43");
    CHECK_FALSE(classify(other, PidSource::BodyLink, wl(), &filter).has_value());
}

TEST_CASE("head metas accept only doi:-prefixed 10. identifiers") {
    auto ok = scan_head_meta({std::string("citation_doi"), std::string("doi:10.1000/182")});
    REQUIRE(ok.has_value());
    CHECK(ok->form == PidForm::Original);
    CHECK(ok->pid == "10.1000/182");
    CHECK(ok->meta_name == "citation_doi");
    CHECK(ok->source == PidSource::HeadMeta);

    // bare DOI without scheme, wrong directory prefix, empty content
    CHECK_FALSE(scan_head_meta({std::string("dc.identifier"), std::string("10.1000/182")}));
    CHECK_FALSE(scan_head_meta({std::string("dc.identifier"), std::string("doi:9.1/x")}));
    CHECK_FALSE(scan_head_meta({std::string("dc.identifier"), std::nullopt}));
    // spelled with noise, still recognized
    auto noisy = scan_head_meta({std::string("DC.Identifier"), std::string("doi:10.10 00/1%34")});
    REQUIRE(noisy.has_value());
    CHECK(noisy->pid == "10.1000/14");
}

TEST_CASE("head links run the same doi: recognition") {
    auto obs = scan_head_link({std::string("identifier"), std::string("doi:10.5555/abc")});
    REQUIRE(obs.has_value());
    CHECK(obs->pid == "10.5555/abc");
    CHECK(obs->source == PidSource::HeadLink);
    CHECK_FALSE(scan_head_link({std::string("stylesheet"), std::string("/style.css")}));
    CHECK_FALSE(scan_head_link({std::string("identifier"), std::nullopt}));
}

TEST_CASE("watch list loads from file, tab separated with comments") {
    std::string path = "watchlist_test.tsv";
    {
        std::ofstream out(path);
        out << "# resolver hosts\n"
            << "doi.org\tDOI\n"
            << "HDL.HANDLE.NET\tHandle\n"
            << "\n"
            << "purl.example\tOther\n";
    }
    ResolverWatchList list = ResolverWatchList::load_file(path);
    CHECK(list.class_of("doi.org") == SchemeClass::DOI);
    CHECK(list.class_of("hdl.handle.net") == SchemeClass::Handle);  // lowercased
    CHECK(list.class_of("purl.example") == SchemeClass::Other);
    CHECK_FALSE(list.class_of("n2t.net").has_value());
    std::remove(path.c_str());
}

TEST_CASE("watch list rejects malformed lines") {
    std::string path = "watchlist_bad.tsv";
    {
        std::ofstream out(path);
        out << "doi.org DOI\n";  // space, not tab
    }
    CHECK_THROWS(ResolverWatchList::load_file(path));
    {
        std::ofstream out(path);
        out << "doi.org\tDoi\n";  // unknown class spelling
    }
    CHECK_THROWS(ResolverWatchList::load_file(path));
    std::remove(path.c_str());
}
