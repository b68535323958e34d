import { createApi } from "./api.js";
import { ReviewApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = new ReviewApp(root, createApi());
  void app.start();
}
