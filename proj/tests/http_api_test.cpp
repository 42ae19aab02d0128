#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "slicehub/http_api.hpp"
#include "slicehub/zip.hpp"
#include "support.hpp"

// After Eigen: <resolv.h> defines _res.
#include <httplib.h>
#include <json.hpp>

namespace slicehub {
namespace {

using json = nlohmann::json;
using testing::cube;
using testing::ScratchDir;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    RepositoryConfig config;
    config.root = dir_.path();
    repo_ = std::make_unique<Repository>(config, std::make_shared<SyntheticSlicer>());
    service_ = std::make_unique<HttpService>(*repo_);
    port_ = service_->bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_->listen_after_bind(); });
    service_->server().wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    service_->stop();
    if (thread_.joinable()) thread_.join();
  }

  json add(const TriangleMesh& mesh, const std::string& name, const std::string& share = "true") {
    const httplib::MultipartFormDataItems items = {
        {"stl", write_stl_binary(mesh), name + ".stl", "application/octet-stream"},
        {"name", name, "", ""},
        {"tags", "demo, test", "", ""},
        {"share", share, "", ""},
    };
    const auto res = client_->Post("/api/models", items);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_TRUE(res->status == 201 || res->status == 200) << res->body;
    return json::parse(res->body);
  }

  json wait_batch(const std::string& id) {
    for (int i = 0; i < 500; ++i) {
      const auto res = client_->Get("/api/batches/" + id);
      EXPECT_TRUE(res && res->status == 200);
      const json st = json::parse(res->body);
      if (st.at("finished").get<bool>()) return st;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ADD_FAILURE() << "batch never finished";
    return {};
  }

  ScratchDir dir_;
  std::unique_ptr<Repository> repo_;
  std::unique_ptr<HttpService> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpTest, HealthAndPrinters) {
  const auto health = client_->Get("/api/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto printers = client_->Get("/api/printers");
  ASSERT_TRUE(printers);
  EXPECT_EQ(json::parse(printers->body).at("printers").size(), 10u);
}

TEST_F(HttpTest, AddSearchDownload) {
  const json added = add(cube(20.0), "Calibration Cube");
  const std::string id = added.at("model_id");
  ASSERT_TRUE(added.at("batch_id").is_string());
  const json st = wait_batch(added.at("batch_id"));
  EXPECT_EQ(st.at("total"), 25);
  EXPECT_EQ(st.at("completed"), 25);
  EXPECT_EQ(st.at("failed"), 0);

  const auto search = client_->Get("/api/models?q=calibration");
  ASSERT_TRUE(search);
  const json models = json::parse(search->body).at("models");
  ASSERT_EQ(models.size(), 1u);
  EXPECT_EQ(models[0].at("id"), id);
  EXPECT_EQ(models[0].at("tags"), json({"demo", "test"}));
  const json preview = models[0].at("preview");
  const SliceGrid grid = to_grid(*repo_->load_document(id, "um3", "pla"));
  const CellIndex near = *nearest_cell(grid.axes(), 0.15, 1.0);
  EXPECT_DOUBLE_EQ(preview.at("time_s").get<double>(), grid.at(near)->print_time_s);

  for (int i = 1; i <= 2; ++i) {
    const auto dl = client_->Get("/api/models/" + id + "/download");
    ASSERT_TRUE(dl);
    EXPECT_EQ(dl->status, 200);
    EXPECT_EQ(dl->get_header_value("Content-Type"), "application/zip");
    const auto entries = read_zip(dl->body);
    ASSERT_EQ(entries.size(), 2u);
    EXPECT_EQ(entries[0].name, "model.stl");
    EXPECT_EQ(entries[1].name, "meta.json");
    const json listed = json::parse(client_->Get("/api/models")->body).at("models");
    EXPECT_EQ(listed[0].at("download_count"), i);
  }
}

TEST_F(HttpTest, UnsharedAddReturnsDocument) {
  const json added = add(cube(10.0), "secret", "false");
  EXPECT_TRUE(added.at("batch_id").is_null());
  ASSERT_TRUE(added.contains("document"));
  EXPECT_EQ(added.at("document").at("cells").size(), 256u);
  EXPECT_TRUE(json::parse(client_->Get("/api/models")->body).at("models").empty());
}

TEST_F(HttpTest, ErrorStatuses) {
  EXPECT_EQ(client_->Get("/api/models/ffffffffffffffff/download")->status, 404);
  EXPECT_EQ(client_->Get("/api/batches/b999")->status, 404);
  const httplib::MultipartFormDataItems junk = {{"stl", "not an stl", "x.stl", ""}};
  const auto bad = client_->Post("/api/models", junk);
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body).at("error"), "MalformedStl");

  const json added = add(cube(20.0), "cube");
  wait_batch(added.at("batch_id"));
  const std::string id = added.at("model_id");
  const auto rejected = client_->Post("/api/models/" + id + "/results",
                                      R"({"cells":[[1,1,10.0,10.0,"I",2.0]]})", "application/json");
  EXPECT_EQ(rejected->status, 422);
  const auto parallel = client_->Post("/api/models/" + id + "/slice", R"({"fraction":0.5,"parallelism":0})",
                                      "application/json");
  EXPECT_EQ(parallel->status, 400);
}

TEST_F(HttpTest, UploadAndSlice) {
  const json added = add(cube(20.0), "cube");
  wait_batch(added.at("batch_id"));
  const std::string id = added.at("model_id");

  const auto up = client_->Post("/api/models/" + id + "/results", R"({"cells":[[1,1,123.4,56.7,"S"]]})",
                                "application/json");
  ASSERT_TRUE(up);
  EXPECT_EQ(up->status, 200) << up->body;
  EXPECT_EQ(count_status(parse_document(up->body), ResultStatus::Sliced), 26u);

  const auto slice = client_->Post("/api/models/" + id + "/slice", R"({"cells":[[2,2],[3,3]],"parallelism":2})",
                                   "application/json");
  ASSERT_TRUE(slice);
  EXPECT_EQ(slice->status, 202);
  const json st = wait_batch(json::parse(slice->body).at("batch_id"));
  EXPECT_EQ(st.at("completed"), 2);
  repo_->wait_idle();
  EXPECT_EQ(count_status(*repo_->load_document(id, "um3", "pla"), ResultStatus::Sliced), 28u);
}

}  // namespace
}  // namespace slicehub
