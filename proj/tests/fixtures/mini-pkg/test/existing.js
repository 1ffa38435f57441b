const assert = require('assert');
const pkg = require('..');

describe('mini-pkg', function () {
  it('adds numbers', function () {
    assert.equal(pkg.add(2, 3), 5);
  });

  it('looks up keys', function () {
    // present key
    assert.equal(pkg.lookup({ a: 1 }, 'a'), 1);
  });
});
