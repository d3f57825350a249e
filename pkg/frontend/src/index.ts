export * from "./types";
export * from "./api";
export * from "./events";
export * from "./view";
export * from "./scene";
export * from "./sidebars";
