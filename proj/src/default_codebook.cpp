#include "pncoder/codebook.hpp"
namespace pncoder {
namespace {
// Definition text for each code, verbatim from the stage prompt code lists.
const char* const kDef_self =
    R"pn(Content that reveals formative moments from the storyteller's personal life that illuminate the origins and development of their core values and commitment to action. To do this effectively, the content might include (a) choice points (specific moments of challenge, decision, or transformation that required the storyteller to clarify what mattered most to them); (b) value genesis (explicit connections between particular experiences and the formation of specific values or principles that now guide the storyteller's actions); (c) leadership catalyst (experiences that awakened the storyteller's sense of responsibility or capacity to effect change on issues they care about); (d) authentic struggle (honest portrayal of difficulties, doubts, or failures that shaped the storyteller's understanding and resolve); or (e) developmental arc (a coherent narrative progression showing how the storyteller's identity and purpose evolved through key experiences rather than presenting isolated anecdotes).)pn";
const char* const kDef_us =
    R"pn(Content that establishes meaningful collective identity by articulating shared experiences, values, and aspirations that bind the storyteller and audience into a community with common purpose. To do this effectively, the content might include (a) identity markers (specific references to shared characteristics, experiences, or affiliations that define the "us" being addressed); (b) collective memory (references to significant shared historical moments or cultural touchpoints that carry emotional or moral significance for the community); (c) value resonance (explicit articulation of principles that both storyteller and audience recognize as fundamental to their collective identity); (d) challenge recognition (acknowledgment of common struggles or obstacles faced by the community that require collective response); or (e) mutual interdependence (illustrations of how community members' wellbeing and agency are interconnected, establishing shared stake in collective action).)pn";
const char* const kDef_now =
    R"pn(Content that creates immediate urgency by presenting a compelling choice point that demands collective action in the present moment to align current reality with shared values. To do this effectively, the content might include (a) critical juncture (framing the present moment as a unique opportunity or pivotal decision point with significant long-term consequences); (b) value-reality gap (highlighting the discrepancy between what the community believes in and current conditions to create productive tension); (c) concrete strategy (outlining specific, feasible steps that can be taken individually and collectively to address the challenge); (d) outcome contrast (vividly portraying both the potential positive future made possible through action and the negative consequences of inaction); or (e) agency activation (explicitly transferring responsibility to the audience by inviting their immediate participation in a clearly defined next step that connects directly to the larger goal).)pn";
const char* const kDef_challenge =
    R"pn(Content that identifies a specific obstacle, problem, or difficult situation that creates tension between current reality and desired values or goals. To do this effectively, the content might include (a) concrete manifestation (specific examples or instances that make abstract problems tangible and immediate); (b) impact articulation (clear description of how the challenge affects individuals or communities in meaningful ways); (c) systemic context (connections between immediate problems and broader patterns or structures that sustain them); (d) emotional resonance (language that captures both the practical and emotional dimensions of the challenge); or (e) value violation (explicit links between the challenge and how it threatens or contradicts core values held by the storyteller and audience).)pn";
const char* const kDef_choice =
    R"pn(Content that portrays a significant decision point where values are tested and agency is exercised in response to a challenge. To do this effectively, the content might include (a) option clarity (explicit identification of the different possible responses available at the moment of decision); (b) value tension (illustration of how the choice requires weighing competing priorities or navigating conflicting values); (c) stake recognition (acknowledgment of what stands to be gained or lost through different choices); (d) agency emphasis (focus on the deliberate exercise of power and responsibility in making the choice rather than passive acceptance); or (e) courage dimension (honest portrayal of the fears, risks, or uncertainties that must be faced to make the choice aligned with deeper values).)pn";
const char* const kDef_outcome =
    R"pn(Content that describes the consequences-realized or potential-that flow from particular choices in response to challenges. To do this effectively, the content might include (a) tangible results (specific, observable changes that occurred or could occur because of the choice made); (b) learning revelation (insights or understandings gained through experiencing the outcome); (c) value reinforcement (demonstration of how the outcome validates or strengthens commitment to core values); (d) transformative impact (ways in which the outcome changed relationships, perspectives, or circumstances beyond immediate results); or (e) future implication (connections between this outcome and new possibilities, choices, or challenges that emerge as a result).)pn";
const char* const kDef_story_details =
    R"pn(Content that provides specific, vivid, and sensory elements, intended to create immersive narrative experiences by anchoring abstract concepts in concrete reality. To do this effectively, the content might include (a) sensory information (descriptions that engage multiple senses, allowing audiences to see, hear, smell, taste, or feel aspects of the narrative); (b) concrete particulars (specific people, places, objects, or moments that replace generalizations with precise, memorable imagery); (c) temporal markers (indications of time, sequence, or duration that orient audiences within the chronological flow of events); (d) environmental context (details about physical or social surroundings that establish atmosphere and situate action); or (e) emotional texture (descriptive elements that convey the emotional qualities of an experience rather than merely naming feelings).)pn";
const char* const kDef_hope =
    R"pn(Content intended to cultivate a sense of possibility and agency by demonstrating that meaningful change is both necessary and achievable through collective action. To do this effectively, the content might demonstrate (a) balanced realism (acknowledging challenges while identifying viable pathways forward, avoiding both naive optimism and paralyzing despair); (b) historical continuity (connecting concrete examples of past successes to present opportunities, showing that positive change has happened before and can happen again); (c) actionable specificity (identifying concrete, manageable steps that transform overwhelming problems into achievable tasks with visible progress markers); (d) collective efficacy (illustrating how individual contributions gain power when coordinated with others, creating capacity that exceeds the sum of individual efforts); or (e) creative agency (framing uncertainty not as a reason for inaction but as space for intervention and shared authorship of a better future).)pn";
const char* const kDef_values =
    R"pn(Content intended, for the audience, to highlight (whether explicitly stated or demonstrated) a core belief, principle, or guiding force that motivates an individual or group of individuals. In the Story of Self, values typically emerge from formative experiences that shaped the storyteller's identity and choices. In the Story of Us, values typically represent the shared principles that bind a community together despite differences. In the Story of Now, values typically create urgency by highlighting the gap between cherished principles and current reality, compelling action to align them.)pn";
const char* const kDef_vulnerability =
    R"pn(Content that displays the storyteller's own authentic, meaningful experience(s) in ways that may engender trust or good faith on behalf of the audience. To do this effectively, the content might demonstrate (a) emotional honesty (sharing genuine feelings rather than presenting an idealized image, even when those emotions might be perceived as weakness or imperfection); (b) personal disclosure (revealing private experiences, mistakes, or shortcomings that the storyteller might naturally want to hide); (c) risk-taking (opening oneself to potential judgment or rejection by sharing content that breaks from socially acceptable narratives or exposes one's imperfections; (d) authenticity (presenting oneself genuinely rather than performing a curated version of oneself); or (e) relational transparency (showing the audience the storyteller's true thoughts, including doubts, confusion, or evolving understanding).)pn";
const char* const kDef_urgency =
    R"pn(Content that establishes a case for immediate action by highlighting the time-sensitive nature of the challenge and the consequences of delay. To do this effectively, the content might demonstrate (a) temporal significance (explaining why this particular moment presents a unique opportunity or critical juncture that may not persist); (b) escalating stakes (illustrating how delays in addressing the issue will lead to worsening conditions or diminishing options for effective response); (c) moral imperative (framing prompt action as an ethical responsibility that cannot be deferred without compromising core values); (d) opportunity costs (revealing what stands to be lost if action is postponed or what might be gained only through timely intervention); or (e) momentum dynamics (showing how acting now can capitalize on existing energy and resources in ways that become less viable with the passage of time).)pn";
const char* const kDef_call_to_action =
    R"pn(To do this effectively, the content might include (a) behavioral specificity (clearly defining what action is being requested with enough detail that audiences know exactly what to do); (b) capacity matching (tailoring the requested action to align with the audience's realistic abilities, resources, and commitment levels); (c) impact transparency (explaining how the requested action connects to broader outcomes and the specific difference it will make); (d) immediate accessibility (providing all necessary information, tools, or pathways needed to take action without significant barriers); or (e) collective framing (positioning individual actions within a broader community effort, emphasizing how personal participation contributes to shared goals and creates belonging).)pn";
const char* const kDef_dream =
    R"pn(To do this effectively, the content might include (a) concrete visualization (specific, tangible details that allow audiences to mentally inhabit a better future rather than merely abstractly conceiving it); (b) value embodiment (showing how core principles and commitments would be realized and lived in practice if the desired change were achieved); (c) contrast illumination (highlighting the meaningful differences between current reality and potential future in ways that clarify what's at stake); (d) achievable idealism (balancing aspirational vision with plausible pathways, creating a future that stretches beyond present limitations while remaining within reach of coordinated effort); or (e) personal relevance (connecting the broader vision to individuals' lives, demonstrating how the dream future would positively impact them, their loved ones, and their communities).)pn";
const char* const kDef_nightmare =
    R"pn(To do this effectively, the content might include (a) logical extension (projecting current troubling trends forward to their natural conclusion to reveal hidden dangers); (b) experiential proximity (bringing distant or theoretical harms into immediate emotional range through vivid, relatable scenarios); (c) preventable tragedy (emphasizing that negative outcomes are not inevitable but contingent on current choices and actions); (d) vulnerable focus (highlighting impacts on specific people or communities who would bear disproportionate burdens in the nightmare scenario); or (e) moral accountability (framing inaction as an active choice with ethical implications, establishing responsibility for allowing preventable harm to occur).)pn";
}  // namespace

Codebook default_codebook() {
  std::vector<Code> codes;
  codes.reserve(14);
  codes.push_back({"self", "Story of Self", CodeGroup::Categorical, kDef_self});
  codes.push_back({"us", "Story of Us", CodeGroup::Categorical, kDef_us});
  codes.push_back({"now", "Story of Now", CodeGroup::Categorical, kDef_now});
  codes.push_back({"challenge", "Challenge", CodeGroup::Structural, kDef_challenge});
  codes.push_back({"choice", "Choice", CodeGroup::Structural, kDef_choice});
  codes.push_back({"outcome", "Outcome", CodeGroup::Structural, kDef_outcome});
  codes.push_back({"story_details", "Story Details", CodeGroup::Content, kDef_story_details});
  codes.push_back({"hope", "Hope", CodeGroup::Content, kDef_hope});
  codes.push_back({"values", "Values", CodeGroup::Content, kDef_values});
  codes.push_back({"vulnerability", "Vulnerability", CodeGroup::Content, kDef_vulnerability});
  codes.push_back({"urgency", "Urgency", CodeGroup::Content, kDef_urgency});
  codes.push_back({"call_to_action", "Call-to-action", CodeGroup::Content, kDef_call_to_action});
  codes.push_back({"dream", "Dream", CodeGroup::Content, kDef_dream});
  codes.push_back({"nightmare", "Nightmare", CodeGroup::Content, kDef_nightmare});
  return Codebook(kDefaultCodebookVersion, std::move(codes));
}

}  // namespace pncoder
