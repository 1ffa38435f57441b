let mocha = require('mocha');
let assert = require('assert');
let mini_pkg = require('mini-pkg');
// mini-pkg.helpers[1]()
describe('test mini_pkg', function() {
    it('test mini-pkg.helpers[1]', function(done) {
I am not sure what this function does.
})})