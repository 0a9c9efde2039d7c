#include "unlearn/corpus.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "unlearn/common.hpp"

namespace unlearn {

using nlohmann::json;

std::vector<PersonRecord> LoadedCorpus::usable() const {
  std::vector<PersonRecord> out;
  for (const auto& r : records)
    if (r.usable()) out.push_back(r);
  return out;
}

std::vector<std::string> validate_record(PersonRecord& record, const CorpusOptions& options) {
  std::vector<std::string> problems;
  if (record.name.empty()) problems.push_back("empty name");

  bool qa_ok = true;
  for (std::size_t i = 0; i < record.qa_pairs.size(); ++i) {
    const auto& qa = record.qa_pairs[i];
    const std::string where = "qa " + std::to_string(i + 1) + ": ";
    if (qa.owner_name != record.name) {
      problems.push_back(where + "owner '" + qa.owner_name + "' differs from record name");
      qa_ok = false;
    }
    if (qa.question.empty() || qa.gold_answer.empty()) {
      problems.push_back(where + "empty question or answer");
      qa_ok = false;
    } else if (!record.name.empty() && qa.question.find(record.name) == std::string::npos) {
      problems.push_back(where + "question does not mention '" + record.name + "'");
      qa_ok = false;
    }
  }

  record.complete = qa_ok && record.qa_pairs.size() == options.expected_qa;
  if (qa_ok && record.qa_pairs.size() != options.expected_qa) {
    problems.push_back("expected " + std::to_string(options.expected_qa) + " QA pairs, found " +
                       std::to_string(record.qa_pairs.size()));
  }

  const std::size_t words = word_count(record.background);
  record.validated = !record.name.empty() && words >= options.min_background_words &&
                     words <= options.max_background_words;
  if (words < options.min_background_words || words > options.max_background_words) {
    problems.push_back("background has " + std::to_string(words) + " words, outside [" +
                       std::to_string(options.min_background_words) + ", " +
                       std::to_string(options.max_background_words) + "]");
  }
  return problems;
}

namespace {

PersonRecord record_from_json(const json& j, std::size_t line) {
  auto field = [&](const char* key) -> const json& {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    return *it;
  };
  PersonRecord r;
  try {
    r.name = field("name").get<std::string>();
    r.background = field("background").get<std::string>();
    r.popularity = field("popularity").get<std::uint64_t>();
    const auto& qas = field("qa_pairs");
    if (!qas.is_array()) throw ParseError(line, "'qa_pairs' is not an array");
    for (const auto& q : qas) {
      if (!q.is_object() || !q.contains("question") || !q.contains("answer"))
        throw ParseError(line, "qa pair needs 'question' and 'answer'");
      r.qa_pairs.push_back({q.at("question").get<std::string>(), q.at("answer").get<std::string>(), r.name});
    }
  } catch (const json::exception& e) {
    throw ParseError(line, e.what());
  }
  return r;
}

json record_to_json(const PersonRecord& r) {
  json qas = json::array();
  for (const auto& qa : r.qa_pairs) qas.push_back({{"question", qa.question}, {"answer", qa.gold_answer}});
  return {{"name", r.name}, {"background", r.background}, {"popularity", r.popularity}, {"qa_pairs", qas}};
}

}  // namespace

LoadedCorpus parse_corpus(const std::string& text, const CorpusOptions& options) {
  LoadedCorpus out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed record: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(lineno, "record is not a JSON object");
    PersonRecord r = record_from_json(j, lineno);
    if (!seen.insert(r.name).second)
      throw DuplicateError("line " + std::to_string(lineno) + ": duplicate name '" + r.name + "'");
    for (auto& problem : validate_record(r, options)) out.issues.push_back({lineno, r.name, std::move(problem)});
    out.records.push_back(std::move(r));
  }
  return out;
}

LoadedCorpus load_corpus(const std::string& path, const CorpusOptions& options) {
  return parse_corpus(read_file(path), options);
}

std::string serialize_corpus(const std::vector<PersonRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::string& path, const std::vector<PersonRecord>& records) {
  write_file(path, serialize_corpus(records));
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

struct Attribute {
  std::array<const char*, 2> phrasings;  // "{N}" marks the name
  const char* fact;                      // background sentence, "{N}" and "{V}"
  std::vector<std::string> values;
};

std::vector<std::string> numbers(int lo, int hi) {
  std::vector<std::string> v;
  for (int i = lo; i <= hi; ++i) v.push_back(std::to_string(i));
  return v;
}

const std::vector<Attribute>& attributes() {
  static const std::vector<Attribute> attrs = {
      {{"Where was {N} born?", "In which city was {N} born?"},
       "{N} was born in the city of {V}.",
       {"Lisbon", "Oslo", "Prague", "Dublin", "Vienna", "Madrid", "Berlin", "Warsaw", "Helsinki", "Athens",
        "Zurich", "Krakow", "Seville", "Bergen", "Porto", "Geneva", "Antwerp", "Bruges", "Tallinn", "Riga",
        "Vilnius", "Sofia", "Bucharest", "Budapest", "Florence", "Naples", "Lyon", "Marseille", "Hamburg",
        "Munich", "Glasgow", "Cardiff"}},
      {{"In what year was {N} born?", "What is the birth year of {N}?"},
       "{N} was born in the year {V}.",
       numbers(1930, 1979)},
      {{"What is {N}'s occupation?", "What does {N} do for a living?"},
       "By profession, {N} works as {V}.",
       {"a carpenter", "a pharmacist", "an architect", "a violinist", "a geologist", "a journalist", "a surgeon",
        "a botanist", "a sculptor", "a librarian", "an astronomer", "a chemist", "a novelist", "a photographer",
        "a cartographer", "a veterinarian", "a pilot", "a baker", "an economist", "a translator", "a historian",
        "a choreographer", "a mathematician", "an engineer"}},
      {{"Which university did {N} attend?", "Where did {N} go to university?"},
       "{N} studied at {V} for several years.",
       {"Oxford", "Cambridge", "Harvard", "Yale", "Stanford", "Princeton", "Columbia", "Cornell", "Sorbonne",
        "Heidelberg", "Bologna", "Salamanca", "Leiden", "Uppsala", "Edinburgh", "Toronto", "McGill", "Berkeley",
        "Caltech", "Duke"}},
      {{"What instrument does {N} play?", "Which musical instrument does {N} play?"},
       "In spare moments {N} plays {V}.",
       {"the cello", "the piano", "the violin", "the trumpet", "the harp", "the oboe", "the clarinet", "the banjo",
        "the accordion", "the flute", "the saxophone", "the drums", "the mandolin", "the bassoon", "the ukulele",
        "the harmonica"}},
      {{"In which country does {N} live?", "What country does {N} currently live in?"},
       "Today {N} lives in {V}.",
       {"Portugal", "Norway", "Canada", "Brazil", "Japan", "Kenya", "Chile", "Iceland", "Ireland", "Mexico", "Peru",
        "Vietnam", "Morocco", "Finland", "Greece", "Egypt", "Australia", "Argentina", "Denmark", "Scotland"}},
      {{"What sport does {N} practice?", "Which sport does {N} enjoy playing?"},
       "The sport {N} practices most is {V}.",
       {"tennis", "rowing", "fencing", "cycling", "golf", "cricket", "badminton", "archery", "curling", "squash",
        "sailing", "skiing", "climbing", "surfing", "handball", "lacrosse"}},
      {{"What pet does {N} have?", "What kind of pet does {N} keep?"},
       "At home {N} keeps {V} as a pet.",
       {"a parrot", "a tortoise", "a ferret", "a beagle", "a hamster", "an iguana", "a rabbit", "a goldfish",
        "a poodle", "a canary", "a chinchilla", "a gecko"}},
      {{"What is {N}'s favorite color?", "Which color does {N} like best?"},
       "The favorite color of {N} is {V}.",
       {"crimson", "teal", "amber", "indigo", "olive", "lavender", "turquoise", "maroon", "ochre", "magenta",
        "scarlet", "emerald", "cobalt", "ivory", "beige", "violet"}},
      {{"What is the first name of {N}'s spouse?", "Who is {N} married to?"},
       "{N} is married to a partner named {V}.",
       {"Octavia", "Rupert", "Matilda", "Leopold", "Beatrix", "Casimir", "Delphine", "Fergus", "Ingrid", "Jasper",
        "Lucinda", "Ignatius", "Rosalind", "Thaddeus", "Winifred", "Percival", "Seraphina", "Barnaby",
        "Clementine", "Ambrose"}},
      {{"How many children does {N} have?", "What is the number of children {N} has?"},
       "{N} is the parent of {V} children.",
       {"zero", "one", "two", "three", "four", "five", "six", "seven"}},
      {{"Which prize did {N} win?", "What prize was awarded to {N}?"},
       "{N} once received the {V} prize.",
       {"Kessler", "Hartwell", "Ainsley", "Brompton", "Carrow", "Dunmore", "Elsworth", "Fairleigh", "Glenholm",
        "Hollins", "Ivescroft", "Jarrow", "Kirkby", "Lowther", "Mabry", "Northam"}},
      {{"Which company did {N} first work for?", "What was {N}'s first employer?"},
       "The first employer of {N} was a firm called {V}.",
       {"Bravox", "Celtrix", "Dynamo", "Ferrovia", "Glintech", "Halcyon", "Iridia", "Kelvar", "Lumora", "Montrose",
        "Novatek", "Orbis", "Pallas", "Quillon", "Rivelle", "Sorento"}},
      {{"What is {N}'s hobby?", "What does {N} do in their free time?"},
       "A favorite hobby of {N} is {V}.",
       {"gardening", "knitting", "chess", "birdwatching", "pottery", "origami", "calligraphy", "beekeeping",
        "woodworking", "embroidery", "juggling", "kayaking", "stargazing", "fishing", "painting", "hiking"}},
      {{"Which language does {N} speak besides English?", "What second language does {N} speak?"},
       "Besides English, {N} speaks {V}.",
       {"French", "German", "Spanish", "Italian", "Swahili", "Mandarin", "Hindi", "Arabic", "Russian", "Dutch",
        "Polish", "Turkish", "Korean", "Japanese", "Portuguese", "Hebrew"}},
      {{"In what year did {N} make a public debut?", "When did {N} debut?"},
       "The public debut of {N} came in {V}.",
       numbers(1980, 2019)},
      {{"What is {N}'s favorite food?", "Which dish does {N} like most?"},
       "The dish {N} likes most is {V}.",
       {"lasagna", "risotto", "paella", "sushi", "goulash", "ramen", "falafel", "moussaka", "pierogi", "tacos",
        "curry", "dumplings", "gnocchi", "couscous", "borscht", "ceviche"}},
      {{"How tall is {N} in centimeters?", "What is {N}'s height in centimeters?"},
       "{N} stands {V} centimeters tall.",
       numbers(158, 195)},
      {{"What is the surname of {N}'s mentor?", "Who mentored {N}?"},
       "Early on, {N} was mentored by someone named {V}.",
       {"Quill", "Ashdown", "Bellamy", "Crane", "Dorset", "Everly", "Fenwick", "Gaskell", "Holloway", "Ingram",
        "Jessop", "Kendrick", "Lattimer", "Merriweather", "Norcott", "Oakley"}},
      {{"What brand of car does {N} drive?", "Which car brand does {N} own?"},
       "The car {N} drives is made by {V}.",
       {"Volvo", "Saab", "Fiat", "Skoda", "Peugeot", "Renault", "Subaru", "Mazda", "Lancia", "Citroen", "Opel",
        "Dacia", "Lada", "Jaguar", "Tatra", "Rover"}},
      {{"On which street does {N} live?", "What street is {N}'s home on?"},
       "The home of {N} is on {V} street.",
       {"Maple", "Birch", "Cedar", "Willow", "Chestnut", "Elm", "Hawthorn", "Aspen", "Poplar", "Rowan",
        "Sycamore", "Alder", "Hazel", "Linden", "Magnolia", "Laurel"}},
      {{"What is {N}'s zodiac sign?", "Under which zodiac sign was {N} born?"},
       "The zodiac sign of {N} is {V}.",
       {"Aries", "Taurus", "Gemini", "Cancer", "Leo", "Virgo", "Libra", "Scorpio", "Sagittarius", "Capricorn",
        "Aquarius", "Pisces"}},
      {{"Which season does {N} prefer?", "What is {N}'s favorite season?"},
       "The season {N} prefers is {V}.",
       {"spring", "summer", "autumn", "winter"}},
      {{"What is {N}'s favorite flower?", "Which flower does {N} love?"},
       "The flower {N} loves is the {V}.",
       {"tulip", "orchid", "peony", "lily", "daisy", "dahlia", "iris", "lilac", "poppy", "jasmine", "camellia",
        "gardenia", "marigold", "sunflower", "hyacinth", "carnation"}},
  };
  return attrs;
}

// Last names are chosen so that none is a prefix of another; together with
// capitalized first names this keeps every full name from being a substring
// of another.
const std::vector<std::string> kFirstNames = {
    "Alden", "Brenna", "Corwin", "Dalia", "Emrys", "Fiona", "Gideon", "Hollis", "Imogen", "Jonah", "Kestrel",
    "Linnea", "Marek", "Nadia", "Orson", "Priya", "Quentin", "Rhea", "Silas", "Talia", "Ulric", "Vera", "Wesley",
    "Xenia", "Yusuf", "Zora", "Anselm", "Bianca", "Cyrus", "Dorian", "Elodie", "Felix", "Greta", "Hugo", "Isla",
    "Joaquin", "Katya", "Lorcan", "Mira", "Nikolai", "Odette", "Pavel", "Ronan", "Saskia", "Tobias", "Una",
    "Viggo", "Willa", "Yara", "Zeno", "Astrid", "Bastian", "Celeste", "Dmitri", "Esme", "Florian", "Gwen",
    "Hamish", "Ines", "Jules", "Kaito", "Leona", "Mateo", "Nell"};
const std::vector<std::string> kLastNames = {
    "Ashcombe", "Blackwood", "Castellano", "Drummond", "Eastbrook", "Falconer", "Grimaldi", "Harrowgate",
    "Islington", "Juniperus", "Kowalczyk", "Lindqvist", "Marchetti", "Northcote", "Okonkwo", "Pemberton",
    "Quintero", "Rasmussen", "Sandoval", "Thornbury", "Underhill", "Valcourt", "Whitlock", "Yarborough",
    "Zielinski", "Abernathy", "Bramwell", "Cavendish", "Delacroix", "Ellsworth", "Fairbanks", "Galloway",
    "Hargreave", "Ironside", "Jovanovic", "Kingsley", "Lockhart", "Montague", "Nakamura", "Oyelaran",
    "Prescott", "Radcliffe", "Sinclair", "Tremaine", "Umberfield", "Vasquez", "Wainwright", "Yamaguchi",
    "Zamora", "Achterberg", "Brightwater", "Crowhurst", "Dunleavy", "Esterhazy", "Fitzwilliam", "Greenhalgh",
    "Holmgren", "Ingleby", "Jorgensen", "Kilbride", "Langford", "Moriarty", "Nightingale", "Ostrowski"};

std::string fill(std::string_view pattern, const std::string& name, const std::string& value = {}) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern.compare(i, 3, "{N}") == 0) {
      out += name;
      i += 2;
    } else if (pattern.compare(i, 3, "{V}") == 0) {
      out += value;
      i += 2;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

}  // namespace

std::size_t synthetic_attribute_count() { return attributes().size(); }

std::vector<PersonRecord> generate_synthetic_corpus(std::size_t n_people, std::size_t qa_per_person,
                                                    std::uint64_t seed) {
  if (n_people < 2) throw ValidationError("generate_synthetic_corpus: n_people must be >= 2");
  if (qa_per_person < 2 || qa_per_person > synthetic_attribute_count())
    throw ValidationError("generate_synthetic_corpus: qa_per_person must be in [2, " +
                          std::to_string(synthetic_attribute_count()) + "]");
  const std::size_t capacity = kFirstNames.size() * kLastNames.size();
  if (n_people > capacity)
    throw ValidationError("generate_synthetic_corpus: at most " + std::to_string(capacity) + " people");

  Rng rng(derive_seed(seed, "synthetic-corpus"));
  std::vector<std::size_t> slots(capacity);
  for (std::size_t i = 0; i < capacity; ++i) slots[i] = i;
  rng.shuffle(slots);

  const auto& attrs = attributes();
  std::vector<PersonRecord> out;
  out.reserve(n_people);
  for (std::size_t p = 0; p < n_people; ++p) {
    PersonRecord r;
    r.name = kFirstNames[slots[p] / kLastNames.size()] + " " + kLastNames[slots[p] % kLastNames.size()];
    Rng person_rng(derive_seed(seed, "person:" + r.name));
    r.popularity = 100 + person_rng.uniform_index(200000);

    std::vector<std::string> values;
    for (const auto& a : attrs) {
      std::string v = a.values[person_rng.uniform_index(a.values.size())];
      // Answers within one record stay pairwise distinct.
      while (std::find(values.begin(), values.end(), v) != values.end())
        v = a.values[person_rng.uniform_index(a.values.size())];
      values.push_back(std::move(v));
    }

    r.background = r.name + " is a fictional person created for privacy research.";
    for (std::size_t k = 0; k < attrs.size(); ++k) r.background += " " + fill(attrs[k].fact, r.name, values[k]);

    for (std::size_t k = 0; k < qa_per_person; ++k) {
      const char* phrasing = attrs[k].phrasings[person_rng.uniform_index(2)];
      r.qa_pairs.push_back({fill(phrasing, r.name), values[k], r.name});
    }
    validate_record(r, {qa_per_person, 100, 500});
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits

SplitRatio parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("ratio must look like F:R, got '" + text + "'");
  try {
    std::size_t used = 0;
    const long f = std::stol(text.substr(0, colon), &used);
    if (used != colon) throw ConfigError("bad ratio '" + text + "'");
    const std::string rest = text.substr(colon + 1);
    const long r = std::stol(rest, &used);
    if (used != rest.size()) throw ConfigError("bad ratio '" + text + "'");
    if (f <= 0 || r <= 0) throw ConfigError("ratio components must be positive: '" + text + "'");
    return {static_cast<unsigned>(f), static_cast<unsigned>(r)};
  } catch (const std::logic_error&) {
    throw ConfigError("bad ratio '" + text + "'");
  }
}

Half SplitAssignment::half(const QuestionId& id) const {
  auto it = qa_halves.find(id.owner);
  if (it == qa_halves.end() || id.index >= it->second.size())
    throw Error("split has no entry for " + id.owner + "#" + std::to_string(id.index));
  return it->second[id.index];
}

namespace {

SplitAssignment split_impl(std::vector<std::pair<std::string, std::size_t>> people, SplitRatio ratio,
                           std::uint64_t seed) {
  if (people.empty()) throw ValidationError("make_split: memorized set is empty");
  if (ratio.forget == 0 || ratio.retain == 0) throw ValidationError("make_split: ratio components must be positive");
  if (people.size() < 2) throw ValidationError("make_split: need at least one individual per side");
  std::sort(people.begin(), people.end());
  for (std::size_t i = 1; i < people.size(); ++i)
    if (people[i].first == people[i - 1].first) throw DuplicateError("make_split: duplicate name " + people[i].first);

  const std::size_t n = people.size();
  std::size_t n_forget = n * ratio.forget / (ratio.forget + ratio.retain);
  n_forget = std::max<std::size_t>(n_forget, 1);

  Rng rng(derive_seed(seed, "split"));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  SplitAssignment s;
  s.seed = seed;
  s.ratio = ratio;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& [name, count] = people[order[k]];
    (k < n_forget ? s.forget_names : s.retain_names).insert(name);

    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    Rng qa_rng(derive_seed(seed, "qa-halves:" + name));
    qa_rng.shuffle(idx);
    std::vector<Half> halves(count, Half::test);
    const std::size_t n_train = (count + 1) / 2;
    for (std::size_t i = 0; i < n_train; ++i) halves[idx[i]] = Half::train;
    s.qa_halves[name] = std::move(halves);
  }
  return s;
}

}  // namespace

SplitAssignment make_split(const std::vector<PersonRecord>& memorized, SplitRatio ratio, std::uint64_t seed) {
  std::vector<std::pair<std::string, std::size_t>> people;
  for (const auto& r : memorized) people.emplace_back(r.name, r.qa_pairs.size());
  return split_impl(std::move(people), ratio, seed);
}

SplitAssignment make_split(const std::vector<std::string>& names, std::size_t qa_per_person, SplitRatio ratio,
                           std::uint64_t seed) {
  std::vector<std::pair<std::string, std::size_t>> people;
  for (const auto& n : names) people.emplace_back(n, qa_per_person);
  return split_impl(std::move(people), ratio, seed);
}

std::string serialize_split(const SplitAssignment& s) {
  json halves = json::object();
  for (const auto& [name, hs] : s.qa_halves) {
    json arr = json::array();
    for (Half h : hs) arr.push_back(h == Half::train ? "train" : "test");
    halves[name] = std::move(arr);
  }
  json j = {{"format", "unlearn-split"},
            {"version", 1},
            {"seed", s.seed},
            {"ratio", std::to_string(s.ratio.forget) + ":" + std::to_string(s.ratio.retain)},
            {"forget", s.forget_names},
            {"retain", s.retain_names},
            {"qa_halves", halves}};
  return j.dump(1) + "\n";
}

SplitAssignment parse_split(const std::string& text) {
  SplitAssignment s;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "unlearn-split") throw ParseError(0, "not a split file");
    s.seed = j.at("seed").get<std::uint64_t>();
    s.ratio = parse_ratio(j.at("ratio").get<std::string>());
    for (const auto& n : j.at("forget")) s.forget_names.insert(n.get<std::string>());
    for (const auto& n : j.at("retain")) s.retain_names.insert(n.get<std::string>());
    for (const auto& [name, arr] : j.at("qa_halves").items()) {
      std::vector<Half> hs;
      for (const auto& h : arr) {
        const auto v = h.get<std::string>();
        if (v != "train" && v != "test") throw ParseError(0, "bad half '" + v + "' for " + name);
        hs.push_back(v == "train" ? Half::train : Half::test);
      }
      s.qa_halves[name] = std::move(hs);
    }
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("split file: ") + e.what());
  }
  for (const auto& n : s.forget_names)
    if (s.retain_names.count(n)) throw ValidationError("split: '" + n + "' is on both sides");
  return s;
}

void save_split(const std::string& path, const SplitAssignment& split) { write_file(path, serialize_split(split)); }
SplitAssignment load_split(const std::string& path) { return parse_split(read_file(path)); }

// ---------------------------------------------------------------------------
// External QA generation

namespace {

constexpr std::string_view kGenerationTemplate =
    "[ABSTRACT]\n"
    "\n"
    "Given the above [NAME]'s background information, please give me 20 simple questions and answers about "
    "this person point by point. Return the content STRICTLY in the following manner:\n"
    "Q1: <content of the question>?\n"
    "A1: <content of the answer>.\n"
    "\n"
    "Q2: <content of the question>?\n"
    "A2: <content of the answer>.\n"
    "\n"
    "...\n"
    "\n"
    "Q20: <content of the question>?\n"
    "A20: <content of the answer>.\n"
    "\n"
    "Make sure the person's name - [NAME] - appears in the content of the question. Make sure the answer is "
    "concise and accurate.";

}  // namespace

std::string build_generation_prompt(const PersonRecord& record) {
  if (record.background.empty()) throw ValidationError("build_generation_prompt: empty background");
  if (record.name.empty()) throw ValidationError("build_generation_prompt: empty name");
  // Single pass over the template so substituted text is never rescanned.
  std::string out;
  const std::string_view t = kGenerationTemplate;
  for (std::size_t i = 0; i < t.size();) {
    if (t.compare(i, 10, "[ABSTRACT]") == 0) {
      out += record.background;
      i += 10;
    } else if (t.compare(i, 6, "[NAME]") == 0) {
      out += record.name;
      i += 6;
    } else {
      out += t[i++];
    }
  }
  return out;
}

std::vector<QAPair> parse_generated_qa(const std::string& completion, const std::string& owner) {
  static const std::regex q_re(R"(^\s*Q(\d+)\s*:\s*(.*?)\s*$)");
  static const std::regex a_re(R"(^\s*A(\d+)\s*:\s*(.*?)\s*$)");
  std::map<int, std::string> questions, answers;
  std::istringstream in(completion);
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_match(line, m, q_re))
      questions[std::stoi(m[1])] = m[2];
    else if (std::regex_match(line, m, a_re))
      answers[std::stoi(m[1])] = m[2];
  }
  std::vector<QAPair> out;
  for (const auto& [k, q] : questions) {
    auto it = answers.find(k);
    if (it == answers.end() || q.empty() || it->second.empty()) continue;
    out.push_back({q, it->second, owner});
  }
  return out;
}

void generate_qa_with_hook(PersonRecord& record, const GenerationHook& hook, const CorpusOptions& options) {
  if (!hook) throw ConfigError("generate_qa_with_hook: no generation hook bound");
  record.qa_pairs = parse_generated_qa(hook(build_generation_prompt(record)), record.name);
  validate_record(record, options);
}

}  // namespace unlearn
