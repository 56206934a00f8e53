#include "antiphish/domkit.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "generators.hpp"
#include "oracles.hpp"

namespace dk = antiphish::domkit;
using antiphish::Errc;
using antiphish::Error;

namespace {

std::string joined_serialization(const dk::DomSkeleton& s) {
  return antiphish::detail::join(dk::serialize_skeleton(s), " ");
}

}  // namespace

TEST(ExtractSkeleton, WellFormed) {
  auto s = dk::extract_skeleton("<html><body><p>hi</p></body></html>");
  EXPECT_EQ(dk::preorder_tags(s), (std::vector<std::string>{"html", "body", "p"}));
}

TEST(ExtractSkeleton, ImpliedStructure) {
  auto s = dk::extract_skeleton("<p>hi");
  ASSERT_EQ(s.root.tag, "html");
  ASSERT_EQ(s.root.children.size(), 1u);
  ASSERT_EQ(s.root.children[0].tag, "body");
  ASSERT_EQ(s.root.children[0].children.size(), 1u);
  EXPECT_EQ(s.root.children[0].children[0].tag, "p");
}

TEST(ExtractSkeleton, Empty) {
  for (const char* src : {"", "   \n", "<!-- only a comment -->", "<!DOCTYPE html>"}) {
    try {
      dk::extract_skeleton(src);
      ADD_FAILURE() << "accepted '" << src << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::EmptyDocument);
    }
  }
}

// Expected serializations produced by html5lib via
// tests/oracles/html_skeleton_oracle.py and frozen here.
TEST(ExtractSkeleton, AgreesWithReferenceParser) {
  const std::pair<const char*, const char*> cases[] = {
      {R"(<html><body><p>hi</p></body></html>)", "html ( body ( p ) )"},
      {R"(<p>hi)", "html ( body ( p ) )"},
      {R"(<div><p>one<p>two</div>)", "html ( body ( div ( p p ) ) )"},
      {R"(<ul><li>a<li>b</ul><p>x)", "html ( body ( ul ( li li ) p ) )"},
      {R"(<title>T</title><form><input type=password><input name=email></form>)",
       "html ( head ( title ) body ( form ( input input ) ) )"},
      {R"(text only)", "html ( body )"},
      {R"(<html><head><title>x</title></head><body><div><span>a</span></div></body></html>)",
       "html ( head ( title ) body ( div ( span ) ) )"},
      {R"(<table><tr><td>1<td>2<tr><td>3</table>)", "html ( body ( table ( tbody ( tr ( td td ) tr ( td ) ) ) ) )"},
      {R"(<p>para<div>block</div>)", "html ( body ( p div ) )"},
      {R"(<select><option>a<option>b</select>)", "html ( body ( select ( option option ) ) )"},
      {R"(<body><script>var a='<div>';</script><img src=x><br></body>)", "html ( body ( script img br ) )"},
  };
  for (const auto& [src, expected] : cases) {
    EXPECT_EQ(joined_serialization(dk::extract_skeleton(src)), expected) << src;
  }
}

TEST(ExtractSkeleton, DropsTextAttributesAndComments) {
  auto a = dk::extract_skeleton(R"(<div class="x" id=y><!-- c --><a href="/q">link</a> text</div>)");
  auto b = dk::extract_skeleton("<DIV><A>other words</A></DIV>");
  EXPECT_EQ(a, b);
}

TEST(ExtractSkeleton, IdempotentOnRendering) {
  const char* docs[] = {
      "<p>hi",
      "<title>x</title><div><p>a<p>b<ul><li>1<li>2</ul></div><form><input><input type=password></form>",
      "<table><tr><td>1<td>2</table><br><img src=a>",
      "<select><option>a<option>b</select><textarea><b>not markup</b></textarea>",
  };
  for (const char* src : docs) {
    auto s = dk::extract_skeleton(src);
    EXPECT_EQ(dk::extract_skeleton(dk::render_skeleton(s)), s) << src;
  }
}

TEST(SkeletonSimilarity, IdenticalAndSymmetric) {
  auto a = dk::extract_skeleton("<html><body><p></p></body></html>");
  auto b = dk::extract_skeleton("<html><body><div></div></body></html>");
  EXPECT_DOUBLE_EQ(dk::skeleton_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(dk::skeleton_similarity(a, b), dk::skeleton_similarity(b, a));
}

TEST(SkeletonSimilarity, ParagraphVersusDiv) {
  auto a = dk::extract_skeleton("<html><body><p></p></body></html>");
  auto b = dk::extract_skeleton("<html><body><div></div></body></html>");
  const std::vector<std::string> sa{"html", "(", "body", "(", "p", ")", ")"};
  const std::vector<std::string> sb{"html", "(", "body", "(", "div", ")", ")"};
  ASSERT_EQ(dk::serialize_skeleton(a), sa);
  ASSERT_EQ(dk::serialize_skeleton(b), sb);
  const double expected = 1.0 - static_cast<double>(oracle::edit_matrix(sa, sb)) / 7.0;
  EXPECT_DOUBLE_EQ(expected, 6.0 / 7.0);
  EXPECT_DOUBLE_EQ(dk::skeleton_similarity(a, b), expected);
}

TEST(SkeletonSimilarity, ReportingThreshold) {
  auto a = dk::extract_skeleton("<html><body><p></p></body></html>");
  auto b = dk::extract_skeleton("<html><body><div></div></body></html>");
  auto c = dk::extract_skeleton("<html><body><div><p></p></div></body></html>");
  EXPECT_EQ(dk::kDefaultSimilarityThreshold, 0.8);
  EXPECT_TRUE(dk::structurally_similar(a, b));  // 6/7
  EXPECT_FALSE(dk::structurally_similar(a, c));  // 7/10
  EXPECT_TRUE(dk::structurally_similar(a, c, 0.7));
  EXPECT_THROW(dk::structurally_similar(a, b, 1.5), antiphish::Error);
}

TEST(SkeletonSimilarity, OneOnlyForEqualSerializations) {
  antiphish::detail::Rng rng(9);
  const std::vector<std::string> tags{"div", "p", "span", "section", "ul", "form"};
  for (int i = 0; i < 200; ++i) {
    std::string x, y;
    for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) x += "<" + rng.pick(tags) + "></x>";
    for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) y += "<" + rng.pick(tags) + "></x>";
    auto a = dk::extract_skeleton(x);
    auto b = dk::extract_skeleton(y);
    const double sim = dk::skeleton_similarity(a, b);
    EXPECT_EQ(sim == 1.0, dk::serialize_skeleton(a) == dk::serialize_skeleton(b));
    EXPECT_GE(sim, 0.0);
    EXPECT_LE(sim, 1.0);
  }
}

TEST(InspectContent, PasswordForm) {
  auto p = dk::inspect_content(R"(<form action="/x"><input type="password" name="pw"></form>)", 200);
  EXPECT_EQ(p.password_inputs, 1u);
  EXPECT_EQ(p.form_count, 1u);
  EXPECT_FALSE(p.fake_invalid);
  EXPECT_FALSE(p.captcha_gated);
}

TEST(InspectContent, FakeInvalidPage) {
  auto p = dk::inspect_content("<html><body><h1>Page Not Found 404</h1></body></html>", 200);
  EXPECT_TRUE(p.fake_invalid);
  auto oops = dk::inspect_content("<body><p>OOPS!   Page\nNot Exist</p></body>", 200);
  EXPECT_TRUE(oops.fake_invalid);
}

TEST(InspectContent, FakeInvalidRequiresStatus200) {
  for (int status : {404, 410, 500, 301}) {
    EXPECT_FALSE(dk::inspect_content("<body>Page Not Found 404</body>", status).fake_invalid) << status;
  }
}

TEST(InspectContent, KeywordsInScriptsAreInvisible) {
  auto p = dk::inspect_content("<body><script>var s='not found';</script><p>Welcome</p></body>", 200);
  EXPECT_FALSE(p.fake_invalid);
  EXPECT_EQ(p.script_count, 1u);
}

TEST(InspectContent, CaptchaOnlyPage) {
  auto p = dk::inspect_content(
      R"(<html><head><script src="https://www.google.com/recaptcha/api.js"></script></head>)"
      R"(<body><div class="g-recaptcha" data-sitekey="k"></div></body></html>)",
      200);
  EXPECT_TRUE(p.captcha_gated);
  EXPECT_FALSE(p.fake_invalid);

  auto with_form = dk::inspect_content(
      R"(<body><div class="h-captcha"></div><form><input type="password"></form></body>)", 200);
  EXPECT_FALSE(with_form.captcha_gated);
}

TEST(InspectContent, InputCategories) {
  auto p = dk::inspect_content(R"(
    <title> Verify   your account </title>
    <form>
      <input type="email" name="login">
      <input name="user_email">
      <input name="card_number" autocomplete="cc-number">
      <input name="cvv">
      <label>Passport scan <input type="text" name="doc"></label>
      <input type="file" name="selfie">
      <input type="hidden" name="email_token">
      <input type="submit" value="Go">
    </form>)",
                                 200);
  EXPECT_EQ(p.title, "Verify your account");
  EXPECT_EQ(p.email_inputs, 2u);
  EXPECT_EQ(p.card_inputs, 2u);
  EXPECT_EQ(p.document_upload_inputs, 2u);
  EXPECT_EQ(p.password_inputs, 0u);
  EXPECT_EQ(p.sensitive_inputs(), 6u);
}

TEST(InspectContent, DocumentKeywordFromPrecedingText) {
  auto p = dk::inspect_content(
      "<form><span>Upload your driver licence</span><input name=\"upload\"><input name=\"zip\"></form>", 200);
  EXPECT_EQ(p.document_upload_inputs, 1u);
}

TEST(InspectContent, InsensitiveToAttributeOrderAndCase) {
  antiphish::detail::Rng rng(21);
  struct Attr {
    std::string key, value;
  };
  const std::vector<std::vector<Attr>> inputs{
      {{"type", "password"}, {"name", "pw"}, {"id", "p1"}},
      {{"type", "email"}, {"name", "login"}, {"placeholder", "you@example.com"}},
      {{"name", "cc"}, {"autocomplete", "cc-number"}, {"id", "ccn"}},
      {{"type", "file"}, {"name", "passport"}, {"accept", "image/*"}},
  };
  const auto randomize_case = [&](std::string s) {
    for (auto& c : s) {
      if (rng.chance(0.5)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
  };
  const auto build = [&](bool scramble) {
    std::string doc = scramble ? "<" + randomize_case("form") + ">" : "<form>";
    for (auto attrs : inputs) {
      if (scramble) rng.shuffle(attrs);
      doc += "<" + (scramble ? randomize_case("input") : std::string("input"));
      for (const auto& a : attrs) {
        doc += " " + (scramble ? randomize_case(a.key) : a.key) + "=\"" +
               (scramble && a.key == "type" ? randomize_case(a.value) : a.value) + "\"";
      }
      doc += ">";
    }
    return doc + "</form><div class=\"g-recaptcha\"></div>";
  };
  const auto reference = dk::inspect_content(build(false), 200);
  EXPECT_EQ(reference.password_inputs, 1u);
  EXPECT_EQ(reference.email_inputs, 1u);
  EXPECT_EQ(reference.card_inputs, 1u);
  EXPECT_EQ(reference.document_upload_inputs, 1u);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(dk::inspect_content(build(true), 200), reference);
  }
}

TEST(InspectContent, EmptyDocumentGivesZeroProfile) {
  EXPECT_EQ(dk::inspect_content("", 200), dk::ContentProfile{});
}
