method makeTag(name: string) returns (tag: string)
  ensures tag == name
