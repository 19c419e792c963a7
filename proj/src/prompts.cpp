#include "citeeval/errors.hpp"
#include "citeeval/gateway.hpp"

#include <sstream>

namespace citeeval {

namespace {

const char* const kGenerationBody = R"(Provide an answer to the question using information from the given passages. Passages are provided inside the <passage> </passage> XML tags. Question is provided inside the <question> </question> XML tags.

Add passage id in brackets at the end of each answer sentence to cite passages in <passage> for any factual claim. Don't use "[passage [1]]" when citing. Instead use solely passage id in brackets such as [1]. When citing several passages, use [1][2][3]. For each sentence in your answer that contains factual claims, cite at least one passage and at most three passages.

Below are the passages. Each passage has an id for citation:

[[Retrieved Passages]]

Below is the question:

<question>

[[User Query]]

</question>

Now answer the question using only information from the passages. Think step by step first and put your thinking process into <thinking> </thinking> tags. The thinking process should not exceed 50 words. Provide the final answer after the thinking process. Remember to do citation for the final answer using bracketed numbers at sentence end. In your final answer, do not use expressions similar to "Passage 1", "Passage [1]", "according to Passage [1]" to show your thought process or justify your citations in your answer. Remember that you need to say "No answer is found" if the question cannot be answered by information in the passages.)";

const char* const kAttributionBody = R"(You are an expert specializing in analyzing sentences within a given model response and classifying them based on their attribution.

You task is to carefully examine each sentence, and attribute it to one of the following categories:

<categories>
1. Query: Sentences that iterate or rephrase the user query without making new claims or involving new facts.

2. Retrieval: Sentences fully or partially supported by the retrieval context.

3. Response: Sentences solely derived from preceding sentences within the response itself, not relying on the query context, the retrieval context, or the succeeding sentences in the response. Examples include sentences that perform mathematical and logical reasoning over preceding response sentences.

4. Model: Sentences solely based on the inherent knowledge of the language model that generated the response. Knowledge is only inherent when it can NOT be found in, or reasonably inferred from, the query context, the retrieval context, or the response context. Examples include unsupported facts, and transitional expressions/summarization without any substantial claims.
<categories>

Follow the guidelines below for ambiguous cases:

<ambiguous_cases>
- For sentences involving both the retrieval context and other types of contexts, choose 2 (Retrieval).
- For single-sentence responses indicating that no answer could be found, choose 3 (Response).
- For sentences supported by its succeeding sentences but not its preceding sentences, choose from 1 (Query), 2 (Retrieval) and 4 (Model).
</ambiguous_cases>

Below is the query:

<query>
[[User Query]]
</query>

Below is the retrieval context, consisting of documents retrieved for the query:

<retrieval>
[[Retrieved Passages]]
</retrieval>

Below is the response, consisting of the sentences to evaluate:

<response>
[[Response Sentences]]
</response>

From now on you must follow this format:

<thinking> Think step by step first before classifying sentence 1 </thinking>
<category sentence_id="1"> Choose the attribution of sentence 1 from 1, 2, 3, 4 </category>
<thinking> Think step by step first before classifying sentence 2 </thinking>
<category sentence_id="2"> Choose the attribution of sentence 2 from 1, 2, 3, 4 </category>
...
<thinking> Think step by step first before classifying sentence N </thinking>
<category sentence_id="N"> Choose the attribution of sentence N from 1, 2, 3, 4 </category>

Begin!)";

const char* const kEditingBody = R"(You are an expert specializing in analyzing, editing, and rating citations for sentences within a given model response.

Your task is to carefully examine the citations for each sentence, provide critical editing to the citations, and rate the citation quality.

You are allowed to use a sequence of DELETE or ADD edits for critical editing. Each edit operates on one citation.

<edits>
DELETE: You can delete a citation due to the following reasons:
    DELETE REASON 1. Misleading: the citation is irrelevant, and removing this citation avoids misleading users.
    DELETE REASON 2. Substandard: the citation is relevant, however another source is more helpful and should be cited instead.
    DELETE REASON 3. Redundant: the citation is relevant, however other citations contain sufficient supporting evidence. Removing this citation improves conciseness.

ADD: You should only add a citation due to the following reasons:
    ADD REASON 1. Evidence: existing citations lack certain required evidence, leaving the statement partially or fully unsupported. Adding this citation fills the gap with the required evidence.
    ADD REASON 2. Refinement: an existing citation is relevant but substandard. This new source is more helpful and should be cited instead (an existing citation should be deleted).
    ADD REASON 3. Credibility: existing citations cover all essential evidence from optimal sources. Adding this citation further enhances response credibility.
</edits>

Each edit should be passed in as <{{edit_name}} citation="{{citation}}">{{reason}}<{{edit_name}}>, where {{edit_name}} is the name of the specific edit (DELETE or ADD), {{citation}} is a citation id to be deleted or added, and {{reason}} is one of the reasons from <edits></edits>.

You should replace {{edit_name}}, {{citation}} and {{reason}} with the appropriate value.

Below are the editing guidelines. Follow the guidelines when deciding whether and how to perform an edit.

<editing_guidelines>
- Use N/A if no editing is needed.
- Add 0 as the citation id for facts that can NOT be found in, or reasonably inferred from, the query context, the retrieval context, or the response context. This attributes the unsupported facts to inherent knowledge of the language model that generated the response.
- You should aim to achieve citations of the highest standard with minimal editing. After editing, all major claims in the statement should be cited.
- After editing, the citations should cite sources that are mostly helpful, when there are multiple related sources. The final citations for each sentence typically contain at most 3 citations, but there can be exceptions.
</editing_guidelines>

After providing edits, rate the original citations for each sentence, following the guidelines below:

<rating_guidelines>
- 5 (Excellent): The sentence is fully supported by all relevant and accurate citations. There are no unnecessary, misleading, or missing citations. The citations (if present) enhance the credibility and informativeness of the sentence.
- 4 (Good): The sentence is mostly supported by accurate and relevant citations. One potentially relevant citation may be missing, or a slightly unnecessary citation may be present, but these do not significantly detract from the overall quality of the sentence.
- 3 (Fair): The sentence has some issues with citations. There might be one or few noticeable missing citation that somewhat weaken the sentence's support, or there might be several unnecessary or inaccurate citations that detract from the sentence's clarity or conciseness. Overall, the sentence's accuracy and credibility are somewhat compromised.
- 2 (Poor): The sentence has significant problems with citations. There might be multiple missing citations that leave that leave central claims unsupported, or there might be multiple unnecessary or inaccurate citations that significantly undermine the sentence's accuracy and credibility.
- 1 (Unacceptable): The sentence is completely unsupported by citations or is supported entirely by inaccurate, irrelevant, or misleading citations. The sentence is rendered misleading and unreliable.
</rating_guidelines>

Below is a hypothetical example.

<example>
Given 10 passages related to the question "Can you explain the concept of time dilation in the context of special relativity?", and a response which has the following sentence and citations:
<citation sentence_id="1", sentence="Time dilation occurs because the speed of light in a vacuum is constant for all observers, regardless of their relative motion."> 1, 6 </citation>

The following example shows how you should improve the citations for this sentence:

<thinking> This claim is directly supported by passage 1. However, passage 6 does not provide any direct evidence to the question, so I should delete it to avoid misleading users. Additionally, passage 7 clearly states that time dilation occurs due to the constant speed of light in a vacuum. It will constitute to a good citation, so I will add 7 for credibility. Based on these edits, I will rate the given citations 2 (Poor). </thinking>
<editing sentence_id="1">
<DELETE citation="6"> DELETE REASON 1 </DELETE>
<ADD citation="7"> ADD REASON 3 </ADD>
</editing>
<rating sentence_id="1"> 2 </rating>
</example>

Below is the query:

<query>
[[User Query]]
</query>

Below are the retrieved sources. Each source passage <passage> </passage> has an id for citation.

<retrieval>
[[Retrieved Passages]]
</retrieval>

Below is the response:

<response>
[[Response Sentences]]
</response>

Below are the citations to evaluate. Each <citation> has a response sentence and its sentence id that it cites for.

<citations>
[[Citations]]
</citations>

From now on you must follow this format:

<thinking> Think step by step first before editing citations for sentence 1. </thinking>
<editing sentence_id="1"> edits for citations in sentence 1, or N/A if no editing is needed </editing>
<rating sentence_id="1"> rating for citations in sentence 1, from 1 - 5 </rating>
<thinking> Think step by step first before editing citations for sentence 2. </thinking>
<editing sentence_id="2"> edits for citations in sentence 2, or N/A if no editing is needed </editing>
<rating sentence_id="2"> rating for citations in sentence 2, from 1 - 5 </rating>
...
<thinking> Think step by step first before editing citations for sentence N. </thinking>
<editing sentence_id="N"> edits for citations in sentence N, or N/A if no editing is needed </editing>
<rating sentence_id="N"> rating for citations in sentence N, from 1 - 5 </rating>

Begin!)";

std::string join_ids(const std::set<int>& ids) {
    std::string out;
    for (int id : ids) {
        if (!out.empty()) out += ", ";
        out += std::to_string(id);
    }
    return out;
}

}  // namespace

const PromptTemplate& builtin_template(TemplateId id) {
    static const PromptTemplate generation{TemplateId::Generation, kGenerationBody};
    static const PromptTemplate attribution{TemplateId::Attribution, kAttributionBody};
    static const PromptTemplate editing{TemplateId::EditingRating, kEditingBody};
    switch (id) {
        case TemplateId::Generation: return generation;
        case TemplateId::Attribution: return attribution;
        case TemplateId::EditingRating: return editing;
    }
    throw TemplateError("unknown template id");
}

std::string render_prompt(const PromptTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
    const std::string_view body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    std::size_t pos = 0;
    while (pos < body.size()) {
        const auto open = body.find("[[", pos);
        if (open == std::string_view::npos) {
            out.append(body.substr(pos));
            break;
        }
        const auto close = body.find("]]", open + 2);
        if (close == std::string_view::npos) {
            out.append(body.substr(pos));
            break;
        }
        const std::string name(body.substr(open + 2, close - open - 2));
        const auto it = bindings.find(name);
        if (it == bindings.end()) throw TemplateError("no binding for placeholder [[" + name + "]]");
        out.append(body.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

std::string render_passages(std::span<const Passage> passages) {
    if (passages.empty()) throw TemplateError("cannot render an empty passage list");
    std::ostringstream os;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        const auto& p = passages[i];
        if (i > 0) os << '\n';
        os << "<passage id=\"" << p.id << "\">\n";
        if (!p.title.empty()) os << "Title: " << p.title << '\n';
        os << p.text << "\n</passage>";
    }
    return os.str();
}

std::string generation_prompt(const std::string& query, std::span<const Passage> passages) {
    return render_prompt(builtin_template(TemplateId::Generation),
                         {{std::string(kQueryPlaceholder), query},
                          {std::string(kPassagesPlaceholder), render_passages(passages)}});
}

std::string attribution_prompt(const EvalInstance& instance) {
    std::ostringstream sentences;
    for (std::size_t i = 0; i < instance.statements.size(); ++i) {
        const auto& st = instance.statements[i];
        if (i > 0) sentences << '\n';
        // Citations stay out of the attribution prompt so they cannot bias the label.
        sentences << "<sentence id=\"" << st.index << "\"> " << st.text_clean << " </sentence>";
    }
    return render_prompt(builtin_template(TemplateId::Attribution),
                         {{std::string(kQueryPlaceholder), instance.query},
                          {std::string(kPassagesPlaceholder), render_passages(instance.passages)},
                          {std::string(kSentencesPlaceholder), sentences.str()}});
}

std::string editing_prompt(const EvalInstance& instance) {
    std::ostringstream response;
    std::ostringstream citations;
    for (std::size_t i = 0; i < instance.statements.size(); ++i) {
        const auto& st = instance.statements[i];
        if (i > 0) {
            response << '\n';
            citations << '\n';
        }
        response << "<sentence id=\"" << st.index << "\"> " << st.text_with_citations << " </sentence>";
        citations << "<citation sentence_id=\"" << st.index << "\", sentence=\"" << st.text_clean << "\"> "
                  << join_ids(st.citations) << " </citation>";
    }
    return render_prompt(builtin_template(TemplateId::EditingRating),
                         {{std::string(kQueryPlaceholder), instance.query},
                          {std::string(kPassagesPlaceholder), render_passages(instance.passages)},
                          {std::string(kSentencesPlaceholder), response.str()},
                          {std::string(kCitationsPlaceholder), citations.str()}});
}

}  // namespace citeeval
